"""Optimality verification and an exhaustive S-pair oracle.

Nothing here uses the incremental factorization or the solver; all checks
are recomputed from the problem data so they can catch solver bugs.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dense import neg_def_cholesky
from .errors import BorderedSingular, NotNegativeDefinite
from .solver import feasibility_tol

ACCEPT_TOL = 1e-8
RANK_TOL = 1e-10


def row_rank(M, tol=RANK_TOL):
    """Numerical row rank from a pivoted QR of M'."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] == 0:
        return 0
    if M.shape[1] == 0:
        return 0
    _, Rq, _ = sla.qr(M.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(Rq))
    if d.size == 0:
        return 0
    scale = max(1.0, float(np.max(np.abs(M))))
    return int(np.sum(d > tol * scale))


def gamma_matrix(problem, alpha):
    """Schur-complement matrix Gamma_alpha assembled from the bordered system.

    ``Gamma = G11 - [G12 A_a'] [[G22, B_a'], [B_a, 0]]^{-1} [G12'; A_a]``
    """
    alpha = list(alpha)
    nx, ny, q = problem.nx, problem.ny, len(alpha)
    A_a = problem.A[alpha]
    B_a = problem.B[alpha]
    if q and row_rank(B_a) < q:
        raise BorderedSingular(f"rows of B for {sorted(i + 1 for i in alpha)} are dependent")
    K = np.zeros((ny + q, ny + q))
    K[:ny, :ny] = problem.G22
    K[:ny, ny:] = B_a.T
    K[ny:, :ny] = B_a
    right = np.vstack([problem.G12.T, A_a])
    try:
        X = np.linalg.solve(K, right)
    except np.linalg.LinAlgError:
        raise BorderedSingular("bordered matrix is singular") from None
    left = np.hstack([problem.G12, A_a.T])
    Gam = problem.G11 - left @ X
    return 0.5 * (Gam + Gam.T)


def is_pos_def(S):
    if S.shape[0] == 0:
        return True
    try:
        neg_def_cholesky(-S)
    except NotNegativeDefinite:
        return False
    return True


def normals_neg_def(problem, alpha):
    """True iff N_a' G^{-1} N_a is negative definite."""
    alpha = list(alpha)
    if not alpha:
        return True
    N = problem.D[alpha].T
    S = N.T @ problem.solve_G(N)
    try:
        neg_def_cholesky(0.5 * (S + S.T))
    except NotNegativeDefinite:
        return False
    return True


def gamma_pd(problem, alpha):
    """Direct test that Gamma_alpha is positive definite (False if undefined)."""
    try:
        return is_pos_def(gamma_matrix(problem, alpha))
    except BorderedSingular:
        return False


@dataclass
class VerificationReport:
    kkt_residual: float
    feasibility_max: float
    complementarity_max: float
    sign_violation: float
    activity_mismatch: list
    gamma_min_eig_proxy: str
    gamma_direct: str
    strict_complementarity: bool
    B_alpha_rank_ok: bool
    scale: float
    reasons: list = field(default_factory=list)

    @property
    def accepted(self):
        return not self.reasons

    @property
    def verdict(self):
        return "accept" if self.accepted else "reject"

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "kkt_residual": self.kkt_residual,
            "feasibility_max": self.feasibility_max,
            "complementarity_max": self.complementarity_max,
            "sign_violation": self.sign_violation,
            "activity_mismatch": [i + 1 for i in self.activity_mismatch],
            "gamma_min_eig_proxy": self.gamma_min_eig_proxy,
            "gamma_direct": self.gamma_direct,
            "strict_complementarity": self.strict_complementarity,
            "B_alpha_rank_ok": self.B_alpha_rank_ok,
            "scale": self.scale,
        }


def verify_spair(problem, z, alpha, u, tol=ACCEPT_TOL):
    """Check the second-order sufficient conditions at ``(z, alpha, u)``.

    ``u`` holds the multipliers of ``alpha`` in the same order.  Constraints
    that are tight but not in ``alpha`` carry a zero multiplier; they make
    strict complementarity fail (reported, not a rejection) and are included
    in the Gamma and rank tests.
    """
    z = np.asarray(z, dtype=float)
    alpha = [int(i) for i in alpha]
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size != len(alpha):
        raise ValueError("u must have one entry per index in alpha")
    lam = np.zeros(problem.m)
    lam[alpha] = u
    s = problem.D @ z + problem.h
    grad = problem.G @ z + problem.c + problem.D.T @ lam

    scale = (1.0 + float(np.max(np.abs(problem.G))) * (1.0 + float(np.max(np.abs(z), initial=0.0)))
             + float(np.max(np.abs(problem.c), initial=0.0))
             + float(np.max(np.abs(problem.h), initial=0.0)))
    thr = tol * scale
    act_tol = max(feasibility_tol(problem), thr)

    kkt = float(np.max(np.abs(grad), initial=0.0))
    feas = float(np.max(s, initial=-np.inf)) if problem.m else 0.0
    comp = float(np.max(np.abs(lam * s), initial=0.0))
    sign = float(max(0.0, np.max(lam, initial=0.0)))
    tight = [int(i) for i in np.flatnonzero(np.abs(s) <= act_tol)]
    support = sorted(set(tight) | set(alpha))
    mismatch = sorted(set(tight) ^ set(alpha))

    reasons = []
    if kkt > thr:
        reasons.append(f"stationarity residual {kkt:.3e}")
    if feas > thr:
        reasons.append(f"feasibility: max s = {feas:.3e}")
    if comp > thr:
        reasons.append(f"complementarity {comp:.3e}")
    if sign > thr:
        reasons.append(f"sign violation: max multiplier {sign:.3e}")
    not_tight = sorted(set(alpha) - set(tight))
    if not_tight:
        reasons.append(f"constraints {[i + 1 for i in not_tight]} in alpha are not tight")

    rank_ok = row_rank(problem.B[support]) == len(support)
    if not rank_ok:
        reasons.append("rows of B on the active set are dependent")
    proxy = "pd" if normals_neg_def(problem, support) else "not-pd"
    direct = ("pd" if gamma_pd(problem, support) else "not-pd") if rank_ok else "undefined"
    if proxy != "pd":
        reasons.append("N' G^{-1} N is not negative definite on the active set")
    if direct != "pd":
        reasons.append("Gamma is not positive definite on the active set")

    strict = all(lam[i] + s[i] < -act_tol for i in range(problem.m))
    return VerificationReport(
        kkt_residual=kkt, feasibility_max=feas, complementarity_max=comp,
        sign_violation=sign, activity_mismatch=mismatch,
        gamma_min_eig_proxy=proxy, gamma_direct=direct,
        strict_complementarity=strict, B_alpha_rank_ok=rank_ok,
        scale=scale, reasons=reasons,
    )


@dataclass
class EnumeratedSPair:
    z: np.ndarray
    alpha: tuple
    u: np.ndarray
    f: float


def enumerate_spairs(problem, max_m=16, J=None, tol=None):
    """Every S-pair of P(J) by exhaustive search over subsets of K (default J = all).

    For each subset with independent normals the equality-constrained KKT
    system is solved directly; solutions are kept when multipliers are
    nonpositive, all constraints in J are satisfied, the tight set equals the
    subset, and Gamma is positive definite.  Sorted by (|alpha|, alpha).
    """
    if problem.m > max_m:
        raise ValueError(f"m = {problem.m} exceeds the enumeration cap {max_m}")
    J = list(range(problem.m)) if J is None else sorted(int(j) for j in J)
    tol = feasibility_tol(problem) if tol is None else tol
    K = set(problem.constraint_set().K)
    cand = [j for j in J if j in K]
    n = problem.n
    out = []
    for q in range(0, min(len(cand), n) + 1):
        for alpha in itertools.combinations(cand, q):
            alpha = list(alpha)
            N = problem.D[alpha].T
            if q and np.linalg.matrix_rank(N) < q:
                continue
            KKT = np.zeros((n + q, n + q))
            KKT[:n, :n] = problem.G
            KKT[:n, n:] = N
            KKT[n:, :n] = N.T
            rhs = np.concatenate([-problem.c, -problem.h[alpha]])
            try:
                sol = np.linalg.solve(KKT, rhs)
            except np.linalg.LinAlgError:
                continue
            z, lam = sol[:n], sol[n:]
            scale = 1.0 + float(np.max(np.abs(lam), initial=0.0))
            if q and np.max(lam) > tol * scale:
                continue
            s = problem.D @ z + problem.h
            if np.max(s[J], initial=-np.inf) > tol:
                continue
            tight = {j for j in J if abs(s[j]) <= tol}
            if tight != set(alpha):
                continue
            if not gamma_pd(problem, alpha):
                continue
            f = 0.5 * float(z @ problem.G @ z) + float(problem.c @ z)
            out.append(EnumeratedSPair(z=z, alpha=tuple(alpha), u=lam, f=f))
    return out


def find_spair(spairs, z, tol=1e-8):
    """The member of ``spairs`` whose z matches within ``tol`` (inf-norm), or None."""
    for sp in spairs:
        if np.max(np.abs(sp.z - z), initial=0.0) <= tol * (1.0 + np.max(np.abs(sp.z), initial=0.0)):
            return sp
    return None
