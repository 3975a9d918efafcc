"""Minimax QP instances: validation, JSON I/O and per-instance precomputation.

The problem is

    min_x max_y  1/2 x'G11 x + x'G12 y + 1/2 y'G22 y + cx'x + cy'y
    s.t.         A x + B y + h <= 0

or, stacking z = (x, y), ``min max 1/2 z'Gz + c'z  s.t.  Dz + h <= 0``.
Indices are 0-based in memory and 1-based in files and on the command line.
"""
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dense import (
    GFactor,
    OpCounter,
    is_symmetric,
    matvec,
    neg_def_cholesky,
)
from .errors import (
    DimensionMismatch,
    G22NotNegativeDefinite,
    GSingular,
    NotNegativeDefinite,
    ParseError,
    SingularMatrix,
)

K_TOL = 1e-12


def _as_matrix(values, rows, cols, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim <= 1:
        if arr.size != rows * cols:
            raise DimensionMismatch(f"{name}: expected {rows * cols} entries, got {arr.size}")
        return arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise DimensionMismatch(f"{name}: expected shape {(rows, cols)}, got {arr.shape}")
    return arr.copy()


def _as_vector(values, n, name):
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size != n:
        raise DimensionMismatch(f"{name}: expected {n} entries, got {arr.size}")
    return arr


@dataclass(frozen=True)
class ConstraintSet:
    """Constraints eligible for activation: K = {i : n_i' G^{-1} n_i < -tol}."""

    K: tuple
    diagHG: np.ndarray
    tol: float

    @property
    def mask(self):
        out = np.zeros(len(self.diagHG), dtype=bool)
        out[list(self.K)] = True
        return out


class MinimaxQP:
    """Immutable, validated minimax QP instance.

    G is factored once on construction.  The products ``G^{-1} n_i`` for all
    constraint normals are computed lazily by :meth:`constraint_set` and cached.
    """

    def __init__(self, G11, G12, G22, cx, cy, A, B, h, name=None, meta=None):
        G22 = np.atleast_2d(np.asarray(G22, dtype=float))
        ny = G22.shape[0] if G22.size else 0
        cx = np.asarray(cx, dtype=float).reshape(-1)
        nx = cx.size
        h = np.asarray(h, dtype=float).reshape(-1)
        m = h.size
        self.nx, self.ny, self.m = nx, ny, m
        self.G11 = _as_matrix(G11, nx, nx, "G11")
        self.G12 = _as_matrix(G12, nx, ny, "G12")
        self.G22 = _as_matrix(G22, ny, ny, "G22")
        self.cx = cx
        self.cy = _as_vector(cy, ny, "cy")
        self.A = _as_matrix(A, m, nx, "A")
        self.B = _as_matrix(B, m, ny, "B")
        self.h = h
        self.name = name
        self.meta = dict(meta or {})

        if not is_symmetric(self.G11):
            raise DimensionMismatch("G11 is not symmetric")
        if not is_symmetric(self.G22):
            raise DimensionMismatch("G22 is not symmetric")
        try:
            neg_def_cholesky(self.G22)
        except NotNegativeDefinite as exc:
            raise G22NotNegativeDefinite(f"G22 is not negative definite: {exc}") from None

        self.G = np.block([[self.G11, self.G12], [self.G12.T, self.G22]])
        self.c = np.concatenate([self.cx, self.cy])
        self.D = np.hstack([self.A, self.B])
        for arr in (self.G, self.c, self.D, self.h):
            arr.setflags(write=False)
        self.factor_ops = OpCounter()
        try:
            self.Gfac = GFactor(self.G, ops=self.factor_ops)
        except SingularMatrix as exc:
            raise GSingular(str(exc)) from None
        self._cset = None
        self._GinvNt = None

    @property
    def n(self):
        return self.nx + self.ny

    def solve_G(self, rhs, ops=None):
        return self.Gfac.solve(rhs, ops=ops)

    def normal(self, i):
        """Constraint normal n_i (row i of D)."""
        return self.D[i]

    def constraint_set(self, ops=None):
        """The set K and the curvatures n_i' G^{-1} n_i (cached after first call)."""
        if self._cset is None:
            if self.m:
                GinvNt = self.solve_G(self.D.T, ops=ops)
                diag = np.einsum("ij,ji->i", self.D, GinvNt)
                if ops is not None:
                    ops.add(mults=self.m * self.n)
                scale = np.linalg.norm(self.D, axis=1) * np.linalg.norm(GinvNt, axis=0)
                tol = K_TOL * (1.0 + float(np.max(scale)))
            else:
                GinvNt = np.zeros((self.n, 0))
                diag = np.zeros(0)
                tol = K_TOL
            K = tuple(int(i) for i in np.flatnonzero(diag < -tol))
            self._GinvNt = GinvNt
            self._GinvNt.setflags(write=False)
            diag.setflags(write=False)
            self._cset = ConstraintSet(K=K, diagHG=diag, tol=tol)
        return self._cset

    def Ginv_normal(self, i):
        """Cached ``G^{-1} n_i``."""
        if self._GinvNt is None:
            self.constraint_set()
        return self._GinvNt[:, i]

    def evaluate(self, z, ops=None):
        """Return ``(f, s, g)``: objective, constraint values Dz + h, gradient Gz + c."""
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise DimensionMismatch(f"z must have length {self.n}")
        Gz = matvec(self.G, z, ops)
        f = 0.5 * float(z @ Gz) + float(self.c @ z)
        s = matvec(self.D, z, ops) + self.h
        return f, s, Gz + self.c

    def slack(self, z, ops=None):
        return matvec(self.D, z, ops) + self.h

    def with_rows(self, rows):
        """Sub-instance keeping only the listed constraint rows (in that order)."""
        rows = list(rows)
        return MinimaxQP(self.G11, self.G12, self.G22, self.cx, self.cy,
                         self.A[rows], self.B[rows], self.h[rows])

    # -- serialization -------------------------------------------------

    def to_dict(self):
        d = {
            "nx": self.nx,
            "ny": self.ny,
            "m": self.m,
            "G11": self.G11.reshape(-1).tolist(),
            "G12": self.G12.reshape(-1).tolist(),
            "G22": self.G22.reshape(-1).tolist(),
            "A": self.A.reshape(-1).tolist(),
            "B": self.B.reshape(-1).tolist(),
            "cx": self.cx.tolist(),
            "cy": self.cy.tolist(),
            "h": self.h.tolist(),
        }
        if self.name:
            d["name"] = self.name
        d.update(self.meta)
        return d

    def __repr__(self):
        return f"MinimaxQP(nx={self.nx}, ny={self.ny}, m={self.m})"


def problem_from_dict(data):
    try:
        nx, ny, m = int(data["nx"]), int(data["ny"]), int(data["m"])
        arrays = {k: data[k] for k in ("G11", "G12", "G22", "A", "B", "cx", "cy", "h")}
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None
    if min(nx, ny, m) < 0:
        raise ParseError("dimensions must be nonnegative")
    if ny == 0:
        raise DimensionMismatch("ny must be positive")
    try:
        G11 = _as_matrix(arrays["G11"], nx, nx, "G11")
        G12 = _as_matrix(arrays["G12"], nx, ny, "G12")
        G22 = _as_matrix(arrays["G22"], ny, ny, "G22")
        A = _as_matrix(arrays["A"], m, nx, "A")
        B = _as_matrix(arrays["B"], m, ny, "B")
        cx = _as_vector(arrays["cx"], nx, "cx")
        cy = _as_vector(arrays["cy"], ny, "cy")
        h = _as_vector(arrays["h"], m, "h")
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None
    meta = {}
    for key in ("z_star", "u_star", "active_set"):
        if key in data and data[key] is not None:
            meta[key] = data[key]
    return MinimaxQP(G11, G12, G22, cx, cy, A, B, h, name=data.get("name"), meta=meta)


def load_problem(source):
    """Load a problem from a path, a JSON string stream, or an already parsed dict."""
    if isinstance(source, dict):
        return problem_from_dict(source)
    try:
        if isinstance(source, (str, Path)):
            with open(source, encoding="utf-8") as fh:
                data = json.load(fh)
        elif isinstance(source, io.IOBase) or hasattr(source, "read"):
            data = json.load(source)
        else:
            raise ParseError(f"cannot load a problem from {type(source).__name__}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    return problem_from_dict(data)


def save_problem(problem, path, z_star=None, u_star=None, active_set=None):
    """Write ``problem`` as JSON; planted-solution fields are optional.

    ``active_set`` is taken 0-based and written 1-based.
    """
    d = problem.to_dict()
    if z_star is not None:
        d["z_star"] = np.asarray(z_star, dtype=float).tolist()
    if u_star is not None:
        d["u_star"] = np.asarray(u_star, dtype=float).tolist()
    if active_set is not None:
        d["active_set"] = [int(i) + 1 for i in active_set]
    text = json.dumps(d, indent=1)
    if path is None:
        return text
    Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def compute_K(problem, ops=None):
    return problem.constraint_set(ops=ops)


def evaluate(problem, z):
    return problem.evaluate(z)


@dataclass
class Assumption2Report:
    holds: bool
    max_eigenvalue: float
    threshold: float
    certificate: np.ndarray = field(default=None, repr=False)


def check_assumption2(problem):
    """Check that D G^{-1} D' is negative semidefinite.

    ``certificate`` is the eigenvector of the largest eigenvalue when the
    check fails, i.e. a direction v with v' D G^{-1} D' v > 0.
    """
    if problem.m == 0:
        return Assumption2Report(True, 0.0, 0.0, None)
    S = problem.D @ problem.solve_G(problem.D.T)
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    scale = 1.0 + float(np.max(np.abs(S)))
    threshold = 1e-10 * scale
    top = float(w[-1])
    holds = top <= threshold
    return Assumption2Report(holds, top, threshold, None if holds else V[:, -1].copy())
