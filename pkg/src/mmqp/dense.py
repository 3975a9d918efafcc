"""Dense linear algebra used throughout the solver.

Every routine that does non-trivial arithmetic accepts an optional
:class:`OpCounter` and charges it with the multiplications, divisions and
square roots it performs.  Counts for library-backed routines (LU,
triangular solves) are the textbook operation counts of the algorithm,
not measurements.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import kernels
from .errors import DimensionMismatch, NotNegativeDefinite, SingularMatrix

SYM_TOL = 1e-12
PIVOT_TOL = 1e-14
NEGDEF_TOL = 1e-12


@dataclass
class OpCounter:
    """Arithmetic operation tally for one solve."""

    multiplications: int = 0
    divisions: int = 0
    square_roots: int = 0

    def add(self, mults=0, divs=0, sqrts=0):
        self.multiplications += int(mults)
        self.divisions += int(divs)
        self.square_roots += int(sqrts)

    @property
    def total(self):
        """Weighted total: mults + divs + 10 * sqrts."""
        return self.multiplications + self.divisions + 10 * self.square_roots

    def snapshot(self):
        return OpCounter(self.multiplications, self.divisions, self.square_roots)

    def as_dict(self):
        return {
            "multiplications": self.multiplications,
            "divisions": self.divisions,
            "square_roots": self.square_roots,
            "total": self.total,
        }


def _charge(ops, mults=0, divs=0, sqrts=0):
    if ops is not None:
        ops.add(mults, divs, sqrts)


def is_symmetric(M, tol=SYM_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if M.size == 0:
        return True
    scale = 1.0 + np.max(np.abs(M))
    return bool(np.max(np.abs(M - M.T)) <= tol * scale)


def inf_norm(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(M), axis=1)))


def matvec(A, x, ops=None):
    """``A @ x`` charged as ``rows * cols`` multiplications per column of x."""
    A = np.asarray(A)
    x = np.asarray(x)
    k = 1 if x.ndim == 1 else x.shape[1]
    _charge(ops, mults=A.shape[0] * A.shape[1] * k)
    return A @ x


def dot(a, b, ops=None):
    _charge(ops, mults=len(a))
    return float(np.dot(a, b))


class GFactor:
    """One-time partial-pivoting LU factorization of the (indefinite) G."""

    def __init__(self, G, ops=None):
        G = np.asarray(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch(f"G must be square, got shape {G.shape}")
        self.n = G.shape[0]
        self.norm = inf_norm(G)
        if self.n == 0:
            self._lu = None
            return
        with warnings.catch_warnings():
            # exact zero pivots are reported below as SingularMatrix
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(G, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if np.min(pivots) <= PIVOT_TOL * max(self.norm, np.finfo(float).tiny):
            raise SingularMatrix(
                f"G is numerically singular (smallest pivot {np.min(pivots):.3e})"
            )
        self._lu = (lu, piv)
        n = self.n
        _charge(ops, mults=n * (n - 1) * (2 * n - 1) // 6, divs=n * (n - 1) // 2)

    def solve(self, rhs, ops=None):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has {rhs.shape[0]} rows, G is {self.n}x{self.n}")
        if self.n == 0:
            return rhs.copy()
        k = 1 if rhs.ndim == 1 else rhs.shape[1]
        _charge(ops, mults=self.n * (self.n - 1) * k, divs=self.n * k)
        return sla.lu_solve(self._lu, rhs, check_finite=False)

    def inverse(self):
        """Explicit G^{-1}.  Only meant for tests and diagnostics."""
        return self.solve(np.eye(self.n))


def solve_with_G(G, rhs, ops=None):
    """Solve ``G X = rhs`` for symmetric indefinite nonsingular G."""
    return GFactor(G, ops=ops).solve(rhs, ops=ops)


def neg_def_cholesky(S, tol=NEGDEF_TOL, ops=None):
    """Lower-triangular L with ``S = -L L^T`` for negative definite S.

    Raises :class:`NotNegativeDefinite` when a pivot of ``-S`` is not larger
    than ``tol * (1 + ||S||_inf)``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatch(f"S must be square, got shape {S.shape}")
    n = S.shape[0]
    A = -S
    L = np.zeros_like(A)
    threshold = tol * (1.0 + inf_norm(S))
    for j in range(n):
        pivot = A[j, j] - np.dot(L[j, :j], L[j, :j])
        if not pivot > threshold:
            raise NotNegativeDefinite(
                f"pivot {j} of -S is {pivot:.3e} (threshold {threshold:.3e})"
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
        _charge(ops, mults=j + (n - j - 1) * j, divs=n - j - 1, sqrts=1)
    return L


def triangular_inverse(R, ops=None):
    """Inverse of a nonsingular upper-triangular matrix."""
    R = np.asarray(R, dtype=float)
    q = R.shape[0]
    if q == 0:
        return np.zeros((0, 0))
    _charge(ops, mults=q * (q - 1) * (q + 1) // 6, divs=q)
    return sla.solve_triangular(R, np.eye(q), lower=False)


def triangular_solve(R, b, trans=False, ops=None):
    """Solve ``R x = b`` (or ``R^T x = b``) with R upper triangular."""
    R = np.asarray(R, dtype=float)
    q = R.shape[0]
    if q == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    k = 1 if np.ndim(b) == 1 else np.shape(b)[1]
    _charge(ops, mults=q * (q - 1) // 2 * k, divs=q * k)
    return sla.solve_triangular(R, b, lower=False, trans="T" if trans else "N")


def givens_retriangularize(R, rowmat=None, colmat=None, start=0, ops=None):
    """In-place Givens sweep on an upper-Hessenberg block (kernel dispatch)."""
    rows = R.shape[0]
    if rowmat is None:
        rowmat = np.zeros((rows, 0))
    if colmat is None:
        colmat = np.zeros((0, rows))
    m, d, s = kernels.retriangularize(R, rowmat, colmat, start)
    _charge(ops, m, d, s)
    return R, rowmat, colmat


def givens_apply_sequence(Rp, companions=(), ops=None):
    """Reduce an upper-Hessenberg ``Rp`` to upper-triangular form.

    Returns ``(Q^T Rp, [Q^T C for C in companions])``; the rotation product Q
    is never formed.  Diagonal entries of the result are nonnegative wherever
    a rotation was applied.
    """
    R = np.array(Rp, dtype=float, order="C", copy=True)
    rows = R.shape[0]
    shapes = [np.shape(C) for C in companions]
    if any(not sh or sh[0] != rows for sh in shapes):
        raise DimensionMismatch("companion row count differs from Rp")
    blocks = [np.asarray(C, dtype=float).reshape(rows, -1) for C in companions]
    widths = [C.shape[1] for C in blocks]
    stacked = np.ascontiguousarray(np.hstack(blocks)) if blocks else np.zeros((rows, 0))
    givens_retriangularize(R, stacked, None, 0, ops)
    out, col = [], 0
    for w, sh in zip(widths, shapes):
        out.append(stacked[:, col:col + w].reshape(sh).copy())
        col += w
    return R, out
