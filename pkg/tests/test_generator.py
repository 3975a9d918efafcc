import numpy as np
import pytest

from mmqp.dense import neg_def_cholesky
from mmqp.errors import GenerationFailed
from mmqp.generator import GenSpec, generate, neg_eigenvectors
from mmqp.problem import check_assumption2
from mmqp.verify import gamma_matrix, verify_spair


@pytest.mark.parametrize("kind", [1, 2])
def test_planted_invariants(kind):
    inst = generate(GenSpec(kind, 5, 8, 12, 4, seed=21))
    p = inst.problem
    s = p.D @ inst.z_star + p.h
    assert np.allclose(s[:4], 0.0, atol=1e-12)
    assert np.all((s[4:] >= -1.0) & (s[4:] < 0.0))
    grad = p.G @ inst.z_star + p.c + p.D.T @ inst.u_star
    assert np.max(np.abs(grad)) <= 1e-10
    assert np.all(inst.u_star[:4] <= 0) and np.all(inst.u_star[4:] == 0)
    neg_def_cholesky(p.G22)
    Gam0 = p.G11 - p.G12 @ np.linalg.solve(p.G22, p.G12.T) if kind == 2 else gamma_matrix(p, [0, 1, 2, 3])
    assert np.all(np.linalg.eigvalsh(0.5 * (Gam0 + Gam0.T)) > 0)
    assert verify_spair(p, inst.z_star, inst.active_set, inst.u_active).accepted


def test_type1_rows_normalized():
    p = generate(GenSpec(1, 3, 5, 7, 2, seed=1)).problem
    assert np.allclose(np.linalg.norm(p.D, axis=1), 1.0)


def test_type2_satisfies_assumption():
    for seed in range(5):
        p = generate(GenSpec(2, 4, 6, 10, 3, seed=seed)).problem
        assert check_assumption2(p).holds


def test_deterministic():
    a = generate(GenSpec(2, 4, 6, 9, 3, seed=99))
    b = generate(GenSpec(2, 4, 6, 9, 3, seed=99))
    assert np.array_equal(a.problem.G, b.problem.G)
    assert np.array_equal(a.problem.h, b.problem.h)
    assert np.array_equal(a.z_star, b.z_star)
    c = generate(GenSpec(2, 4, 6, 9, 3, seed=100))
    assert not np.array_equal(a.z_star, c.z_star)


def test_no_active_constraints_gives_unconstrained_point():
    inst = generate(GenSpec(2, 3, 4, 6, 0, seed=5))
    p = inst.problem
    assert inst.active_set == []
    assert np.allclose(inst.z_star, -p.solve_G(p.c))


def test_neg_eigenvectors_sign_convention(rng):
    A = rng.standard_normal((5, 5))
    w, V = neg_eigenvectors(A + A.T, 2)
    assert np.all(np.diff(w) >= 0)
    for j in range(2):
        first = V[np.flatnonzero(np.abs(V[:, j]) > 1e-12)[0], j]
        assert first > 0


@pytest.mark.parametrize("kwargs", [
    dict(kind=3, nx=1, ny=1, m=1, na=0),
    dict(kind=1, nx=1, ny=2, m=3, na=3),
    dict(kind=1, nx=1, ny=2, m=1, na=2),
    dict(kind=2, nx=1, ny=0, m=1, na=0),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        GenSpec(**kwargs)


def test_generation_failed_when_no_retries():
    with pytest.raises(GenerationFailed):
        generate(GenSpec(2, 2, 3, 3, 1, seed=0), max_tries=0)


def test_metadata_written():
    inst = generate(GenSpec(2, 2, 3, 4, 2, seed=8))
    meta = inst.problem.meta
    assert meta["active_set"] == [1, 2]
    assert np.allclose(meta["z_star"], inst.z_star)
