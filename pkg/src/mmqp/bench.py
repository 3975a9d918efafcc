"""Benchmark harness on generated instances with planted solutions.

For each scale ``(nx, ny, m, na)`` a number of reps is generated and solved;
per-rep records hold the basis-change counts, solve time, weighted operation
count and the distance to the planted solution.  Aggregates follow the usual
convention: means for counts and times, maxima for errors.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dense import OpCounter
from .generator import GenSpec, generate
from .solver import DUAL_ONLY, FULL, OPTIMAL, PARTIAL, solve

MAX_REDRAWS = 50


@dataclass
class RepRecord:
    rep: int
    seed: int
    status: str
    adds: int
    drops: int
    seconds: float
    ops: int
    err_z: float
    err_u: float
    discarded: int = 0
    full_seconds: list = field(default_factory=list)
    partial_seconds: list = field(default_factory=list)


@dataclass
class BenchRecord:
    scale: tuple
    kind: int
    reps: int
    mean_adds: float
    mean_drops: float
    mean_time_s: float
    mean_ops: float
    max_err_z: float
    max_err_u: float
    discarded: int
    runs: list = field(default_factory=list, repr=False)

    def row(self, timing=True):
        nx, ny, m, na = self.scale
        out = {"type": self.kind, "nx": nx, "ny": ny, "m": m, "na": na, "reps": self.reps,
               "mean_adds": self.mean_adds, "mean_drops": self.mean_drops,
               "mean_ops": self.mean_ops, "max_err_z": self.max_err_z,
               "max_err_u": self.max_err_u, "discarded": self.discarded}
        if timing:
            out["mean_time_s"] = self.mean_time_s
        return out


def parse_scale(text):
    parts = [int(v) for v in text.replace("x", ",").split(",") if v.strip()]
    if len(parts) != 4:
        raise ValueError(f"scale {text!r} must have four entries nx,ny,m,na")
    return tuple(parts)


def default_jobs():
    try:
        return max(1, int(os.environ.get("MMQP_JOBS", "1")))
    except ValueError:
        return 1


def rep_seed(base, scale, rep):
    """Deterministic per-rep seed independent of scheduling order."""
    ss = np.random.SeedSequence([int(base), *scale, int(rep)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_rep(kind, scale, rep, base_seed=0):
    """Generate and solve one instance; Type 1 infeasible runs are redrawn."""
    nx, ny, m, na = scale
    discarded = 0
    for redraw in range(MAX_REDRAWS):
        seed = rep_seed(base_seed, scale, rep * MAX_REDRAWS + redraw)
        inst = generate(GenSpec(kind, nx, ny, m, na, seed=seed))
        ops = OpCounter()
        out = solve(inst.problem, ops=ops)
        if out.status != OPTIMAL and kind == 1:
            discarded += 1
            continue
        break
    full_t = [r.seconds for r in out.trace if r.step_kind == FULL]
    part_t = [r.seconds for r in out.trace if r.step_kind in (PARTIAL, DUAL_ONLY)]
    if out.status == OPTIMAL:
        err_z = float(np.linalg.norm(out.spair.z - inst.z_star))
        err_u = float(np.linalg.norm(out.spair.u_full(m) - inst.u_star))
    else:
        err_z = err_u = float("inf")
    return RepRecord(rep=rep, seed=seed, status=out.status, adds=out.adds, drops=out.drops,
                     seconds=out.seconds, ops=ops.total, err_z=err_z, err_u=err_u,
                     discarded=discarded, full_seconds=full_t, partial_seconds=part_t)


def bench_scale(kind, scale, reps=20, base_seed=0, jobs=1):
    def one(rep):
        return run_rep(kind, scale, rep, base_seed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(one, range(reps)))
    else:
        runs = [one(r) for r in range(reps)]
    runs.sort(key=lambda r: r.rep)
    return BenchRecord(
        scale=tuple(scale), kind=kind, reps=reps,
        mean_adds=float(np.mean([r.adds for r in runs])),
        mean_drops=float(np.mean([r.drops for r in runs])),
        mean_time_s=float(np.mean([r.seconds for r in runs])),
        mean_ops=float(np.mean([r.ops for r in runs])),
        max_err_z=float(max(r.err_z for r in runs)),
        max_err_u=float(max(r.err_u for r in runs)),
        discarded=sum(r.discarded for r in runs),
        runs=runs,
    )


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records, timing=True):
    rows = [r.row(timing) for r in records]
    if not rows:
        return ""
    cols = list(rows[0])
    lines = [",".join(cols)] + [",".join(_fmt(row[c]) for c in cols) for row in rows]
    return "\n".join(lines) + "\n"


def step_timings_csv(records):
    """Per-step wall time split by kind, one line per step."""
    lines = ["nx,ny,m,na,rep,kind,seconds"]
    for rec in records:
        nx, ny, m, na = rec.scale
        for run in rec.runs:
            for kind, times in (("full", run.full_seconds), ("partial", run.partial_seconds)):
                for t in times:
                    lines.append(f"{nx},{ny},{m},{na},{run.rep},{kind},{t!r}")
    return "\n".join(lines) + "\n"
