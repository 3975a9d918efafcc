"""Dual active-set method for minimax QPs with coupled inequality constraints.

Starting from the unconstrained minimax point, the solver repeatedly picks a
violated constraint p from K and moves along ``d = H n_p`` while adjusting the
multipliers, dropping active constraints whose multiplier reaches zero
(partial steps) until p becomes active (full step) or the subproblem is shown
to be infeasible.
"""
import csv
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dense import OpCounter, matvec
from .errors import IterationLimitExceeded
from .factor import add_constraint, compute_step_vectors, drop_constraint, empty_state

INF = math.inf
TOL_R = 1e-12
TOL_DUAL = 1e-10
FEAS_TOL = 1e-9

FULL, PARTIAL, DUAL_ONLY, STOP, INFEASIBLE = "full", "partial", "dual-only", "stop", "infeasible"

OPTIMAL = "Optimal"
INFEASIBLE_STATUS = "Infeasible"


def feasibility_tol(problem):
    h = problem.h
    return FEAS_TOL * (1.0 + (float(np.max(np.abs(h))) if h.size else 0.0))


@dataclass
class SPair:
    z: np.ndarray
    alpha: list
    u: np.ndarray
    f: float

    def u_full(self, m):
        out = np.zeros(m)
        out[self.alpha] = self.u
        return out


@dataclass
class IterationRecord:
    iter: int
    z: np.ndarray
    s: np.ndarray
    f: float
    alpha: list
    u: np.ndarray                 # full-length; includes the pending entry for p
    p: int = None
    k: int = None
    d: np.ndarray = None
    r: np.ndarray = None
    delta: float = None
    t1: float = None
    t2: float = None
    t: float = None
    step_kind: str = STOP
    seconds: float = 0.0

    @property
    def remark(self):
        """Remark in the style of a printed solution path."""
        if self.step_kind == FULL:
            return f"full step: add constraint {self.p + 1}"
        if self.step_kind in (PARTIAL, DUAL_ONLY):
            return f"partial step: drop constraint {self.k + 1}"
        if self.step_kind == INFEASIBLE:
            return f"stop: subproblem with constraint {self.p + 1} infeasible"
        return "stop: all constraints satisfied"


@dataclass
class SolveOutcome:
    status: str
    spair: SPair = None
    witness: dict = None
    trace: list = field(default_factory=list)
    adds: int = 0
    drops: int = 0
    ops: OpCounter = field(default_factory=OpCounter)
    warnings: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def optimal(self):
        return self.status == OPTIMAL

    def summary(self):
        """JSON-friendly summary with 1-based constraint indices."""
        out = {"status": self.status, "adds": self.adds, "drops": self.drops,
               "iterations": len(self.trace), "ops": self.ops.as_dict(),
               "warnings": self.warnings}
        if self.spair is not None:
            out.update(z=self.spair.z.tolist(), f=self.spair.f,
                       alpha=[i + 1 for i in self.spair.alpha],
                       u=self.spair.u.tolist())
        if self.witness is not None:
            w = self.witness
            out["witness"] = {"alpha": [i + 1 for i in w["alpha"]], "p": w["p"] + 1,
                              "r": list(map(float, w["r"])), "delta": w["delta"]}
        return out


# -- constraint selection -------------------------------------------------

class MostViolated:
    name = "most-violated"

    def __call__(self, s, candidates):
        return int(candidates[np.argmax(s[candidates])])


class FirstIndex:
    name = "first-index"

    def __call__(self, s, candidates):
        return int(candidates[0])


class ForcedSequence:
    """Replay a fixed entering order; falls back to ``fallback`` once exhausted.

    Entries that are not violated when their turn comes are skipped.
    """

    name = "forced-sequence"

    def __init__(self, sequence, fallback=None):
        self.pending = [int(i) for i in sequence]
        self.fallback = fallback or MostViolated()

    def __call__(self, s, candidates):
        allowed = set(int(c) for c in candidates)
        while self.pending:
            i = self.pending.pop(0)
            if i in allowed:
                return i
        return self.fallback(s, candidates)


def make_rule(rule):
    if rule is None or rule == "most-violated":
        return MostViolated()
    if rule == "first-index":
        return FirstIndex()
    if callable(rule):
        return rule
    if isinstance(rule, (list, tuple)):
        return ForcedSequence(rule)
    raise ValueError(f"unknown selection rule {rule!r}")


def select_violated(s, K_mask, alpha, rule=None, tol=0.0):
    """Index of the constraint to enter, or None when K \\ alpha is feasible."""
    mask = K_mask & (s > tol)
    if alpha:
        mask[list(alpha)] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        return None
    return make_rule(rule)(s, candidates)


# -- single-step pieces ---------------------------------------------------

def initialize(problem, ops=None):
    """Unconstrained minimax point ``z0 = -G^{-1}c`` with ``f0 = c'z0/2``."""
    cset = problem.constraint_set(ops=ops)
    z = -problem.solve_G(problem.c, ops=ops)
    f = 0.5 * float(problem.c @ z)
    return SPair(z=z, alpha=[], u=np.zeros(0), f=f), cset


def step_lengths(sv, u_plus, s_p):
    """Return ``(t1, t2, k_position)``; k_position is None when t1 is infinite."""
    t1, k = INF, None
    r = sv.r
    if r.size:
        neg = np.flatnonzero(r < -TOL_R)
        if neg.size:
            ratios = u_plus[neg] / r[neg]
            j = int(np.argmin(ratios))
            t1 = max(float(ratios[j]), 0.0)
            k = int(neg[j])
    t2 = -s_p / sv.delta if sv.delta < -sv.tol else INF
    return t1, t2, k


def apply_step(z, f, u_plus, sv, t, kind):
    """Move primal and dual iterates by step t; returns new ``(z, f, u_plus)``."""
    u_new = u_plus - t * np.append(sv.r, 1.0)
    f_new = f + t * sv.delta * (0.5 * t - u_plus[-1])
    return z + t * sv.d2, f_new, u_new


def _negligible(d, z):
    return float(np.max(np.abs(d), initial=0.0)) <= TOL_R * (1.0 + float(np.max(np.abs(z), initial=0.0)))


# -- main loop -------------------------------------------------------------

def solve(problem, rule=None, max_iter=None, max_drops=None, trace=True,
          check=False, ops=None):
    """Run the dual algorithm to completion.

    ``rule`` is "most-violated" (default), "first-index", a sequence of 0-based
    indices to replay, or any callable ``(s, candidates) -> index``.
    ``max_drops`` caps partial steps per entering constraint; by default it is
    the active-set size at entry plus one.  ``check`` asserts the S-pair
    invariants at every full step (slow; for testing).
    """
    t_start = time.perf_counter()
    ops = ops if ops is not None else OpCounter()
    rule = make_rule(rule)
    m = problem.m
    if max_iter is None:
        max_iter = 50 * (m + 1)
    tol_feas = feasibility_tol(problem)

    spair, cset = initialize(problem, ops)
    K_mask = cset.mask
    z, f = spair.z, spair.f
    fs = empty_state(problem)
    u = np.zeros(0)
    records = []
    adds = drops = steps = 0

    def u_full(alpha, u_vec, p=None, up=None):
        out = np.zeros(m)
        out[alpha] = u_vec
        if p is not None:
            out[p] = up
        return out

    def outcome(status, **kw):
        return SolveOutcome(status=status, trace=records if trace else [], adds=adds,
                            drops=drops, ops=ops, seconds=time.perf_counter() - t_start, **kw)

    while True:
        s = matvec(problem.D, z, ops) + problem.h
        p = select_violated(s, K_mask, fs.alpha, rule, tol_feas)
        if p is None:
            if trace:
                records.append(IterationRecord(len(records) + 1, z.copy(), s, f,
                                               list(fs.alpha), u_full(fs.alpha, u)))
            result = SPair(z=z, alpha=list(fs.alpha), u=u.copy(), f=f)
            warn = {}
            outside = np.flatnonzero(~K_mask & (s > tol_feas))
            if outside.size:
                warn["violated_outside_K"] = [int(i) + 1 for i in outside]
            return outcome(OPTIMAL, spair=result, warnings=warn)

        u_plus = np.append(u, 0.0)
        drop_budget = fs.q + 1 if max_drops is None else max_drops
        while True:
            steps += 1
            if steps > max_iter:
                raise IterationLimitExceeded(
                    f"no convergence within {max_iter} iterations", records)
            t0 = time.perf_counter()
            s_p = float(problem.D[p] @ z + problem.h[p])
            sv = compute_step_vectors(fs, problem, p, ops)
            t1, t2, kpos = step_lengths(sv, u_plus, s_p)
            t = min(t1, t2)
            rec = None
            if trace:
                rec = IterationRecord(len(records) + 1, z.copy(),
                                      matvec(problem.D, z) + problem.h, f,
                                      list(fs.alpha), u_full(fs.alpha, u_plus[:-1], p, u_plus[-1]),
                                      p=p, d=sv.d2.copy(), r=sv.r.copy(), delta=sv.delta,
                                      t1=t1, t2=t2, t=t)
                records.append(rec)

            if t == INF:
                if rec is not None:
                    rec.step_kind = INFEASIBLE
                    rec.seconds = time.perf_counter() - t0
                witness = {"alpha": list(fs.alpha), "p": p, "r": sv.r.copy(),
                           "delta": sv.delta}
                return outcome(INFEASIBLE_STATUS, witness=witness)

            if t2 <= t1:
                z, f, u_plus = apply_step(z, f, u_plus, sv, t, FULL)
                add_constraint(fs, sv, p, ops)
                u = u_plus
                adds += 1
                if rec is not None:
                    rec.step_kind = FULL
                    rec.seconds = time.perf_counter() - t0
                if check:
                    _check_spair(problem, z, fs, u, tol_feas)
                break

            # with delta = 0 the direction need not vanish; z still moves by t*d
            kind = DUAL_ONLY if _negligible(sv.d2, z) else PARTIAL
            z, f, u_plus = apply_step(z, f, u_plus, sv, t, kind)
            u_plus = np.delete(u_plus, kpos)
            if rec is not None:
                rec.k = fs.alpha[kpos]
                rec.step_kind = kind
            drop_constraint(fs, kpos, ops)
            drops += 1
            if rec is not None:
                rec.seconds = time.perf_counter() - t0
            drop_budget -= 1
            if drop_budget < 0:
                raise IterationLimitExceeded(
                    f"too many partial steps while adding constraint {p + 1}", records)


def _check_spair(problem, z, fs, u, tol_feas):
    s = problem.D @ z + problem.h
    if fs.alpha:
        assert np.max(np.abs(s[fs.alpha])) <= 1e3 * tol_feas, "active constraint not tight"
        assert np.max(u) <= TOL_DUAL * (1.0 + np.max(np.abs(u))), "multiplier sign"
    g = problem.G @ z + problem.c
    Hg = problem.solve_G(g) + fs.M.T @ (fs.M @ g)
    scale = 1.0 + np.max(np.abs(g))
    assert np.max(np.abs(Hg)) <= 1e-8 * scale, "H g(z) != 0"


# -- trace export -----------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x))


def trace_to_csv(records, path=None):
    """Iteration CSV (1-based constraint indices); returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iter", "step_kind", "p", "k", "t1", "t2", "t", "f", "alpha"])
    for rec in records:
        w.writerow([rec.iter, rec.step_kind,
                    "" if rec.p is None else rec.p + 1,
                    "" if rec.k is None else rec.k + 1,
                    _fmt(rec.t1), _fmt(rec.t2), _fmt(rec.t), _fmt(rec.f),
                    ";".join(str(i + 1) for i in rec.alpha)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def trace_to_json(records, path=None):
    """Verbose trace with the full z, s, u, d and r vectors of every row."""
    def vec(v):
        return None if v is None else [float(x) for x in v]

    def num(x):
        if x is None:
            return None
        return "inf" if math.isinf(x) else float(x)

    rows = []
    for rec in records:
        rows.append({
            "iter": rec.iter, "z": vec(rec.z), "s": vec(rec.s), "f": rec.f,
            "alpha": [i + 1 for i in rec.alpha], "u": vec(rec.u),
            "p": None if rec.p is None else rec.p + 1,
            "d": vec(rec.d), "r": vec(rec.r),
            "t1": num(rec.t1), "t2": num(rec.t2), "t": num(rec.t),
            "k": None if rec.k is None else rec.k + 1,
            "step_kind": rec.step_kind, "remark": rec.remark,
        })
    text = json.dumps(rows, indent=1)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
