import numpy as np
import pytest

from mmqp.errors import BorderedSingular
from mmqp.generator import GenSpec, generate
from mmqp.problem import MinimaxQP
from mmqp.solver import solve
from mmqp.verify import (
    enumerate_spairs,
    find_spair,
    gamma_matrix,
    gamma_pd,
    row_rank,
    verify_spair,
)


def test_example1_planted_accepted(example1):
    rep = verify_spair(example1, [2, -1, 0, 3, 0, -2], [2], [-2.0])
    assert rep.accepted, rep.reasons
    assert rep.gamma_direct == "pd" and rep.gamma_min_eig_proxy == "pd"
    assert rep.strict_complementarity


def test_example1_rejections(example1):
    z = np.array([2, -1, 0, 3, 0, -2], dtype=float)
    rep = verify_spair(example1, z, [2], [2.0])
    assert any(r.startswith("sign") for r in rep.reasons)
    rep = verify_spair(example1, z + 0.1, [2], [-2.0])
    assert not rep.accepted
    # the unconstrained point violates constraints 2..5
    z0 = -example1.solve_G(example1.c)
    rep = verify_spair(example1, z0, [], [])
    assert any("feasibility" in r for r in rep.reasons)


def test_wrong_multiplier_length(example1):
    with pytest.raises(ValueError):
        verify_spair(example1, np.zeros(6), [2], [])


def test_example1_oracle_single_spair(example1):
    spairs = enumerate_spairs(example1)
    assert len(spairs) == 1
    sp = spairs[0]
    assert sp.alpha == (2,)
    assert np.allclose(sp.z, [2, -1, 0, 3, 0, -2])
    assert sp.f == pytest.approx(6.5)


def test_example2_oracle(example2):
    spairs = enumerate_spairs(example2)
    # computed by exhaustion over all 16 supports; see the decision ledger
    assert [sp.alpha for sp in spairs] == [(0, 3)]
    assert spairs[0].f == pytest.approx(-191 / 30)
    out = solve(example2)
    assert find_spair(spairs, out.spair.z) is spairs[0]


def test_oracle_unconstrained_instance():
    inst = generate(GenSpec(2, 2, 3, 4, 0, seed=1))
    p = inst.problem
    big = MinimaxQP(p.G11, p.G12, p.G22, p.cx, p.cy, p.A, p.B, p.h - 1e3)
    spairs = enumerate_spairs(big)
    assert len(spairs) == 1 and spairs[0].alpha == ()
    assert np.allclose(spairs[0].z, -big.solve_G(big.c))


def test_oracle_cap():
    inst = generate(GenSpec(2, 1, 2, 20, 0, seed=2))
    with pytest.raises(ValueError):
        enumerate_spairs(inst.problem)


def test_gamma_matrix_matches_generator_construction():
    # Type 1 is built so that Gamma on the planted set is positive definite
    inst = generate(GenSpec(1, 3, 4, 5, 2, seed=4))
    G = gamma_matrix(inst.problem, inst.active_set)
    assert np.allclose(G, G.T)
    assert np.all(np.linalg.eigvalsh(G) > 0)
    assert gamma_pd(inst.problem, inst.active_set)


def test_gamma_empty_set_is_schur_complement(example1):
    p = example1
    G = gamma_matrix(p, [])
    ref = p.G11 - p.G12 @ np.linalg.solve(p.G22, p.G12.T)
    assert np.allclose(G, ref)


def test_gamma_dependent_rows_raise():
    p = MinimaxQP([[1.0]], [[0.0]], [[-1.0]], [0.0], [0.0], [[1.0], [2.0]], [[1.0], [2.0]], [0.0, 0.0])
    with pytest.raises(BorderedSingular):
        gamma_matrix(p, [0, 1])


def test_row_rank():
    assert row_rank(np.zeros((0, 3))) == 0
    assert row_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert row_rank(np.eye(3)) == 3


def test_degenerate_output_reported_not_rejected(example1):
    # move h so that constraint 1 is also tight at z*: multiplier 0, slack 0
    z = np.array([2, -1, 0, 3, 0, -2], dtype=float)
    h = example1.h.copy()
    h[0] = -example1.D[0] @ z
    p = MinimaxQP(example1.G11, example1.G12, example1.G22, example1.cx, example1.cy,
                  example1.A, example1.B, h)
    rep = verify_spair(p, z, [2], [-2.0])
    assert not rep.strict_complementarity
    assert rep.activity_mismatch == [0]
    assert rep.accepted, rep.reasons


@pytest.mark.parametrize("seed", range(5))
def test_planted_type2_accepted(seed):
    inst = generate(GenSpec(2, 4, 6, 8, 3, seed=seed))
    rep = verify_spair(inst.problem, inst.z_star, inst.active_set, inst.u_active)
    assert rep.accepted
    assert rep.as_dict()["verdict"] == "accept"
