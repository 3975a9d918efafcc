"""Incremental factorization of the active-set operators.

With N the matrix whose columns are the active normals (in insertion order)
we keep

    R     upper triangular,  R'R = -N' G^{-1} N
    Rinv  = R^{-1}
    M     = R^{-T} N' G^{-1}

so that the reduced operators are available implicitly as
``N* = -Rinv M`` and ``H = G^{-1} + M'M``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .dense import (
    givens_retriangularize,
    matvec,
    neg_def_cholesky,
    triangular_inverse,
    triangular_solve,
)
from .errors import EmptyActiveSet, NonnegativeCurvature

CURV_TOL = 1e-12


@dataclass
class StepVectors:
    d1: np.ndarray      # M n+
    d2: np.ndarray      # H n+, the primal direction
    delta: float        # n+' H n+
    r: np.ndarray       # -N* n+, negative dual direction
    tol: float          # threshold below which delta counts as negative curvature

    @property
    def d(self):
        return self.d2


class FactorState:
    def __init__(self, n, alpha=(), R=None, Rinv=None, M=None):
        q = len(alpha)
        self.n = n
        self.alpha = list(alpha)
        self.R = np.zeros((q, q)) if R is None else R
        self.Rinv = np.zeros((q, q)) if Rinv is None else Rinv
        self.M = np.zeros((q, n)) if M is None else M

    @property
    def q(self):
        return len(self.alpha)

    def copy(self):
        return FactorState(self.n, self.alpha, self.R.copy(), self.Rinv.copy(), self.M.copy())

    # implicit operators, used by tests and diagnostics
    def H(self, Ginv):
        return Ginv + self.M.T @ self.M

    def Nstar(self):
        return -self.Rinv @ self.M

    def __repr__(self):
        return f"FactorState(q={self.q}, alpha={self.alpha})"


def empty_state(problem):
    return FactorState(problem.n)


def compute_step_vectors(fs, problem, plus_index, ops=None):
    """d1, d2, delta and r for entering constraint ``plus_index``."""
    n_plus = problem.normal(plus_index)
    g_plus = problem.Ginv_normal(plus_index)
    if fs.q:
        d1 = matvec(fs.M, n_plus, ops)
        d2 = matvec(fs.M.T, d1, ops) + g_plus
        r = matvec(fs.Rinv, d1, ops)
    else:
        d1 = np.zeros(0)
        d2 = np.array(g_plus, dtype=float)
        r = np.zeros(0)
    delta = float(n_plus @ d2)
    if ops is not None:
        ops.add(mults=len(n_plus))
    # delta = n'G^{-1}n + |d1|^2, so cancellation error scales with both terms
    tol = CURV_TOL * (1.0 + abs(float(n_plus @ g_plus)) + float(d1 @ d1))
    return StepVectors(d1=d1, d2=d2, delta=delta, r=r, tol=tol)


def add_constraint(fs, sv, plus_index, ops=None):
    """Append constraint ``plus_index`` as the last column of N (in place)."""
    if not sv.delta < -sv.tol:
        raise NonnegativeCurvature(
            f"cannot add constraint {plus_index}: n'Hn = {sv.delta:.3e} is not negative"
        )
    q = fs.q
    root = math.sqrt(-sv.delta)
    if ops is not None:
        ops.add(mults=2 * q + fs.n, divs=1, sqrts=1)
    inv_root = 1.0 / root

    R = np.zeros((q + 1, q + 1))
    R[:q, :q] = fs.R
    R[:q, q] = -sv.d1
    R[q, q] = root

    Rinv = np.zeros((q + 1, q + 1))
    Rinv[:q, :q] = fs.Rinv
    Rinv[:q, q] = sv.r * inv_root
    Rinv[q, q] = inv_root

    M = np.empty((q + 1, fs.n))
    M[:q] = fs.M
    M[q] = sv.d2 * inv_root

    fs.R, fs.Rinv, fs.M = R, Rinv, M
    fs.alpha.append(int(plus_index))
    return fs


def drop_constraint(fs, k_position, ops=None):
    """Remove the active constraint at 0-based position ``k_position`` (in place).

    Column k of R is moved to the end; the resulting Hessenberg block is
    re-triangularized with Givens rotations that are also applied to the rows
    of M and (transposed, from the right) to the columns of Rinv, whose rows
    follow the same permutation.  The trailing row/column is then deleted.
    """
    q = fs.q
    if q == 0:
        raise EmptyActiveSet("no active constraint to drop")
    if not 0 <= k_position < q:
        raise IndexError(f"position {k_position} outside active set of size {q}")
    k = k_position
    if k == q - 1:
        fs.R = fs.R[:-1, :-1].copy()
        fs.Rinv = fs.Rinv[:-1, :-1].copy()
        fs.M = fs.M[:-1].copy()
        fs.alpha.pop()
        return fs

    order = list(range(k)) + list(range(k + 1, q)) + [k]
    R = np.ascontiguousarray(fs.R[:, order])
    Rinv = np.ascontiguousarray(fs.Rinv[order, :])
    M = np.ascontiguousarray(fs.M)
    givens_retriangularize(R, M, Rinv, start=k, ops=ops)
    fs.R = R[:-1, :-1].copy()
    fs.Rinv = Rinv[:-1, :-1].copy()
    fs.M = M[:-1].copy()
    fs.alpha.pop(k)
    return fs


def recompute_from_scratch(problem, alpha, ops=None):
    """Build the factorization for ``alpha`` directly (test oracle for add/drop)."""
    alpha = [int(i) for i in alpha]
    fs = FactorState(problem.n)
    if not alpha:
        return fs
    N = problem.D[alpha].T
    GinvN = problem.solve_G(N, ops=ops)
    S = N.T @ GinvN
    S = 0.5 * (S + S.T)
    L = neg_def_cholesky(S, ops=ops)
    R = L.T.copy()
    fs.alpha = alpha
    fs.R = R
    fs.Rinv = triangular_inverse(R, ops=ops)
    fs.M = triangular_solve(R, GinvN.T, trans=True, ops=ops)
    return fs
