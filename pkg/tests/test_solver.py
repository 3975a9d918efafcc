import csv
import io
import json
import math

import numpy as np
import pytest

from mmqp.dense import OpCounter
from mmqp.errors import IterationLimitExceeded
from mmqp.generator import GenSpec, generate
from mmqp.problem import MinimaxQP
from mmqp.solver import (
    DUAL_ONLY,
    FULL,
    INFEASIBLE,
    OPTIMAL,
    PARTIAL,
    STOP,
    FirstIndex,
    ForcedSequence,
    MostViolated,
    select_violated,
    solve,
    step_lengths,
    trace_to_csv,
    trace_to_json,
)
from mmqp.factor import StepVectors


def test_example1_default_path(example1):
    out = solve(example1, check=True)
    assert out.status == OPTIMAL
    assert np.allclose(out.spair.z, [2, -1, 0, 3, 0, -2], atol=1e-12)
    assert out.spair.alpha == [2]
    assert out.spair.u == pytest.approx([-2.0])
    t = out.trace[0]
    assert t.p == 2 and t.t1 == math.inf and t.t2 == pytest.approx(2.0)


def test_path1_rows(example1):
    out = solve(example1, rule=[1, 2])
    kinds = [r.step_kind for r in out.trace]
    assert kinds == [FULL, PARTIAL, FULL, STOP]
    row = out.trace[1]
    assert row.p == 2 and row.k == 1
    assert row.t1 == pytest.approx(29 / 15) and row.t2 == pytest.approx(23 / 9)
    assert np.allclose(row.u, [0, -29 / 12, 0, 0, 0])
    assert out.adds == 2 and out.drops == 1


def test_path3_pending_multiplier_carries(example1):
    out = solve(example1, rule=[3, 4, 1, 2])
    third, fourth = out.trace[2], out.trace[3]
    assert third.step_kind == DUAL_ONLY and third.k == 4
    assert np.allclose(third.z, fourth.z)
    # pending multiplier of constraint 2 after the dual-only step
    assert np.allclose(fourth.u, [0, -4 / 3, 0, -1, 0])
    assert out.trace[-1].f == pytest.approx(6.5, abs=1e-12)
    assert out.adds == 4 and out.drops == 3


def test_objective_never_increases_within_example1_paths(example1):
    for rule in ([1, 2], [3, 4, 1, 2], "first-index", "most-violated"):
        fs = [r.f for r in solve(example1, rule=rule).trace]
        assert all(b <= a + 1e-12 for a, b in zip(fs, fs[1:]))


def test_example2_rules_agree(example2):
    a = solve(example2, check=True)
    b = solve(example2, rule="first-index", check=True)
    assert a.status == b.status == OPTIMAL
    assert np.allclose(a.spair.z, b.spair.z, atol=1e-10)
    assert a.spair.f == pytest.approx(-191 / 30, abs=1e-12)
    assert sorted(a.spair.alpha) == [0, 3]


def test_example2_within_episode_increase(example2):
    # first-index: the objective rises inside one episode but S-pairs still decrease
    out = solve(example2, rule="first-index")
    fs = [r.f for r in out.trace]
    assert any(b > a for a, b in zip(fs, fs[1:]))
    spair_f = [out.trace[0].f] + [r.f for prev, r in zip(out.trace, out.trace[1:])
                                  if prev.step_kind == FULL]
    assert all(b < a for a, b in zip(spair_f, spair_f[1:]))


def test_infeasible_fixture(infeasible_problem):
    out = solve(infeasible_problem)
    assert out.status == "Infeasible"
    assert out.trace[-1].step_kind == INFEASIBLE
    assert out.witness["alpha"] == [0] and out.witness["p"] == 1
    assert out.witness["delta"] >= 0 and np.all(out.witness["r"] >= 0)
    assert out.summary()["witness"]["p"] == 2


def test_unconstrained_feasible_start():
    p = generate(GenSpec(2, 3, 4, 5, 0, seed=3)).problem
    out = solve(p)
    assert out.status == OPTIMAL and out.spair.alpha == [] and out.adds == 0
    assert np.allclose(out.spair.z, -p.solve_G(p.c))


def test_violated_outside_K_flagged():
    # pure-x constraint x <= -1 has positive curvature and is never entered
    p = MinimaxQP([[1.0]], [[0.0]], [[-1.0]], [0.0], [0.0], [[1.0]], [[0.0]], [1.0])
    out = solve(p)
    assert out.status == OPTIMAL
    assert out.warnings == {"violated_outside_K": [1]}


def test_iteration_limit_carries_trace(example1):
    with pytest.raises(IterationLimitExceeded) as info:
        solve(example1, rule=[3, 4, 1, 2], max_iter=2)
    assert len(info.value.trace) == 2


def test_step_lengths_tie_break_lowest_position():
    sv = StepVectors(d1=np.zeros(3), d2=np.zeros(2), delta=-1.0,
                     r=np.array([-1.0, -2.0, -1.0]), tol=1e-12)
    u = np.array([-1.0, -2.0, -1.0, 0.0])
    t1, t2, k = step_lengths(sv, u, s_p=3.0)
    assert t1 == 1.0 and k == 0 and t2 == 3.0


def test_step_lengths_infinite():
    sv = StepVectors(d1=np.zeros(1), d2=np.zeros(2), delta=0.0, r=np.array([1.0]), tol=1e-12)
    assert step_lengths(sv, np.array([-1.0, 0.0]), 1.0) == (math.inf, math.inf, None)


def test_selection_rules():
    s = np.array([0.5, -1.0, 2.0, 1.0])
    mask = np.ones(4, dtype=bool)
    assert select_violated(s, mask, [], MostViolated()) == 2
    assert select_violated(s, mask, [], FirstIndex()) == 0
    assert select_violated(s, mask, [2], MostViolated()) == 3
    assert select_violated(np.array([-1.0, -2.0]), np.ones(2, bool), []) is None
    rule = ForcedSequence([1, 3], fallback=FirstIndex())
    # 1 is not violated, so it is skipped
    assert select_violated(s, mask, [], rule) == 3
    assert select_violated(s, mask, [], rule) == 0


def test_op_counter_grows(example1):
    ops = OpCounter()
    solve(example1, ops=ops)
    assert ops.multiplications > 0 and ops.square_roots == 1


def test_trace_exports(example1, tmp_path):
    out = solve(example1, rule=[1, 2])
    text = trace_to_csv(out.trace, tmp_path / "t.csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["step_kind"] for r in rows] == ["full", "partial", "full", "stop"]
    assert rows[1]["k"] == "2" and rows[1]["alpha"] == "2"
    assert rows[0]["t1"] == "inf"
    assert (tmp_path / "t.csv").read_text() == text
    data = json.loads(trace_to_json(out.trace))
    assert data[1]["remark"] == "partial step: drop constraint 2"
    assert data[0]["p"] == 2 and len(data[0]["z"]) == 6


def test_deterministic_trace(example1):
    a = trace_to_csv(solve(example1, rule=[3, 4, 1, 2]).trace)
    b = trace_to_csv(solve(example1, rule=[3, 4, 1, 2]).trace)
    assert a == b


@pytest.mark.parametrize("seed", range(8))
def test_planted_type2_recovery_small(seed, backend):
    inst = generate(GenSpec(2, 8, 16, 24, 8, seed=seed))
    out = solve(inst.problem, check=True)
    assert out.status == OPTIMAL
    assert np.linalg.norm(out.spair.z - inst.z_star) <= 1e-9
    assert np.linalg.norm(out.spair.u_full(24) - inst.u_star) <= 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_spair_invariants_along_trace(seed):
    inst = generate(GenSpec(2, 6, 12, 20, 6, seed=100 + seed))
    out = solve(inst.problem, rule="first-index")
    seen = set()
    prev = None
    for a, b in zip(out.trace, out.trace[1:]):
        if a.step_kind == FULL:
            key = (tuple(sorted(b.alpha)), round(b.f, 9))
            assert key not in seen
            seen.add(key)
            if prev is not None:
                assert b.f < prev + 1e-12
            prev = b.f
            act = [i for i in b.alpha]
            assert np.all(np.abs(b.s[act]) <= 1e-8)
            assert np.all(b.u[act] <= 1e-10)
