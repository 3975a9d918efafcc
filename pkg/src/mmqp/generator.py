"""Random minimax QP instances with a planted S-pair.

Two families are produced.  Both draw G22 strictly diagonally dominant with
negative diagonal and Gamma_0 = G11 - G12 G22^{-1} G12' strictly diagonally
dominant with positive diagonal, plant a point z*, multipliers u* on the first
``na`` constraints and slacks on the rest, then back out h and c.

* Type 1: D has unit-norm random rows; G11 is chosen so that the Schur
  complement on the planted active set equals Gamma_0.
* Type 2: G11 = Gamma_0 + G12 G22^{-1} G12', and the constraint normals lie in
  the span of the eigenvectors of G with negative eigenvalue, which makes
  D G^{-1} D' negative semidefinite.

Random streams: one ``numpy.random.Generator`` (PCG64) per drawn matrix,
spawned from ``SeedSequence(seed)`` in a fixed order, plus one extra spawn per
redraw attempt.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GenerationFailed, MMQPError
from .problem import MinimaxQP, check_assumption2
from .verify import row_rank, verify_spair

MAX_TRIES = 100
STREAMS = ("G22", "G12", "Gamma0", "D", "z", "u", "s")


@dataclass(frozen=True)
class GenSpec:
    kind: int
    nx: int
    ny: int
    m: int
    na: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (1, 2):
            raise ValueError("kind must be 1 or 2")
        if min(self.nx, self.m, self.na) < 0 or self.ny <= 0:
            raise ValueError("need nx, m, na >= 0 and ny > 0")
        if self.na > self.m:
            raise ValueError("na cannot exceed m")
        if self.na > self.ny:
            raise ValueError("na cannot exceed ny (B on the active set needs full row rank)")


@dataclass
class PlantedInstance:
    problem: MinimaxQP
    z_star: np.ndarray
    u_star: np.ndarray          # length m, zero off the active set
    active_set: list            # 0-based
    attempts: int = 1

    @property
    def u_active(self):
        return self.u_star[self.active_set]


def _uniform(rng, lo, hi, size):
    return rng.uniform(lo, hi, size=size)


def _dominant(rng, n, sign):
    """Symmetric matrix with r(-1,1) off-diagonals and a dominant diagonal.

    ``sign = -1`` gives diagonal -S - r(0,1) - 1, ``sign = +1`` gives S + r(0,1) + 1.
    """
    M = np.triu(_uniform(rng, -1.0, 1.0, (n, n)), 1)
    M = M + M.T
    S = np.sum(np.abs(M), axis=1)
    M[np.diag_indices(n)] = sign * (S + _uniform(rng, 0.0, 1.0, n) + 1.0)
    return M


def neg_eigenvectors(G, count):
    """Eigenvectors of the ``count`` most negative eigenvalues, sign-normalized.

    Columns are in ascending eigenvalue order and the first entry above 1e-12 in
    magnitude of each column is made positive.
    """
    w, V = np.linalg.eigh(G)
    V = V[:, :count].copy()
    for j in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, j]) > 1e-12)
        if nz.size and V[nz[0], j] < 0:
            V[:, j] = -V[:, j]
    return w[:count], V


def _bordered(G22, B_a):
    ny, q = G22.shape[0], B_a.shape[0]
    K = np.zeros((ny + q, ny + q))
    K[:ny, :ny] = G22
    K[:ny, ny:] = B_a.T
    K[ny:, :ny] = B_a
    return K


def _draw(spec, seq):
    rngs = dict(zip(STREAMS, (np.random.default_rng(s) for s in seq.spawn(len(STREAMS)))))
    nx, ny, m, na = spec.nx, spec.ny, spec.m, spec.na
    n = nx + ny

    G22 = _dominant(rngs["G22"], ny, -1.0)
    G12 = _uniform(rngs["G12"], -1.0, 1.0, (nx, ny))
    Gamma0 = _dominant(rngs["Gamma0"], nx, 1.0)

    if spec.kind == 1:
        D = _uniform(rngs["D"], -1.0, 1.0, (m, n))
        norms = np.linalg.norm(D, axis=1)
        norms[norms == 0.0] = 1.0
        D = D / norms[:, None]
        A, B = D[:, :nx], D[:, nx:]
        if na and row_rank(B[:na]) < na:
            return None
        K = _bordered(G22, B[:na])
        left = np.hstack([G12, A[:na].T])
        try:
            G11 = Gamma0 + left @ np.linalg.solve(K, left.T)
        except np.linalg.LinAlgError:
            return None
    else:
        G11 = Gamma0 + G12 @ np.linalg.solve(G22, G12.T)
        G = np.block([[G11, G12], [G12.T, G22]])
        G = 0.5 * (G + G.T)
        # inertia of G is (nx positive, ny negative) since Gamma0 > 0 and G22 < 0
        _, Qneg = neg_eigenvectors(G, ny)
        Dt = _uniform(rngs["D"], -1.0, 1.0, (ny, m))
        D = (Qneg @ Dt).T
        A, B = D[:, :nx], D[:, nx:]
    G11 = 0.5 * (G11 + G11.T)

    z = _uniform(rngs["z"], -5.0, 5.0, n)
    u = np.zeros(m)
    u[:na] = _uniform(rngs["u"], -30.0, 0.0, na)
    s = np.zeros(m)
    s[na:] = _uniform(rngs["s"], -1.0, 0.0, m - na)

    G = np.block([[G11, G12], [G12.T, G22]])
    h = s - D @ z
    c = -D.T @ u - G @ z
    return G11, G12, G22, c[:nx], c[nx:], A, B, h, z, u


def generate(spec, max_tries=MAX_TRIES):
    """Draw an instance whose planted ``(z*, alpha*)`` passes :func:`verify_spair`.

    Redraws (with a fresh spawned stream) when B on the active set is rank
    deficient, construction fails, or verification rejects the planted point.
    Deterministic for a given spec.
    """
    root = np.random.SeedSequence(spec.seed)
    attempts = root.spawn(max_tries)
    alpha = list(range(spec.na))
    last = "no attempt made"
    for k, seq in enumerate(attempts, start=1):
        drawn = _draw(spec, seq)
        if drawn is None:
            last = "B rows on the active set are dependent"
            continue
        G11, G12, G22, cx, cy, A, B, h, z, u = drawn
        try:
            p = MinimaxQP(G11, G12, G22, cx, cy, A, B, h,
                          name=f"type{spec.kind}-{spec.nx}-{spec.ny}-{spec.m}-{spec.na}-s{spec.seed}")
        except MMQPError as exc:
            last = str(exc)
            continue
        if spec.kind == 2 and not check_assumption2(p).holds:
            last = "D G^-1 D' is not negative semidefinite"
            continue
        rep = verify_spair(p, z, alpha, u[alpha])
        if not rep.accepted:
            last = "; ".join(rep.reasons)
            continue
        p.meta.update(z_star=z.tolist(), u_star=u.tolist(), active_set=[i + 1 for i in alpha])
        return PlantedInstance(problem=p, z_star=z, u_star=u, active_set=alpha, attempts=k)
    raise GenerationFailed(f"no valid instance in {max_tries} draws (last: {last})")
