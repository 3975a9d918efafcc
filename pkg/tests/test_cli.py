import csv
import io
import json

import pytest

from conftest import FIXTURES
from mmqp.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_ITERLIMIT, EXIT_OK, EXIT_REJECT, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_solve_example1(capsys):
    code, out = run(capsys, "solve", "example1")
    assert code == EXIT_OK
    data = json.loads(out.out)
    assert data["status"] == "Optimal"
    assert data["f"] == pytest.approx(6.5)
    assert data["alpha"] == [3]


def test_solve_forced_trace(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, _ = run(capsys, "solve", "example1", "--force-sequence", "2,3", "--trace", str(path))
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    assert [r["p"] for r in rows[:2]] == ["2", "3"]
    assert rows[-1]["step_kind"] == "stop"


def test_solve_verify_flag(capsys):
    code, out = run(capsys, "solve", "example2", "--verify")
    assert code == EXIT_OK
    assert json.loads(out.out)["verification"]["verdict"] == "accept"


def test_infeasible_exit(capsys):
    code, out = run(capsys, "solve", str(FIXTURES / "infeasible.json"))
    assert code == EXIT_INFEASIBLE
    assert json.loads(out.out)["status"] == "Infeasible"


def test_input_errors(capsys, tmp_path):
    assert run(capsys, "solve", str(tmp_path / "missing.json"))[0] == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", str(bad))[0] == EXIT_INPUT
    assert run(capsys, "solve", "example1", "--force-sequence", "0")[0] == EXIT_INPUT
    assert run(capsys, "solve", "example1", "--force-sequence", "9")[0] == EXIT_INPUT
    assert run(capsys, "solve")[0] == EXIT_INPUT
    assert run(capsys, "attack", "--b-grid", "0:2:12")[0] == EXIT_INPUT


def test_iteration_limit(capsys):
    code, _ = run(capsys, "solve", "example1", "--force-sequence", "4,5,2,3", "--max-iter", "1")
    assert code == EXIT_ITERLIMIT


def test_generate_solve_verify_roundtrip(capsys, tmp_path):
    prob = tmp_path / "p.json"
    assert run(capsys, "generate", "--nx", "3", "--ny", "5", "--m", "7", "--na", "2",
               "--seed", "4", "-o", str(prob))[0] == EXIT_OK
    sol = tmp_path / "s.json"
    assert run(capsys, "solve", str(prob), "--out", str(sol))[0] == EXIT_OK
    code, out = run(capsys, "verify", str(prob), "--solution", str(sol))
    assert code == EXIT_OK and json.loads(out.out)["verdict"] == "accept"
    code, out = run(capsys, "verify", str(prob))
    assert code == EXIT_OK
    # perturbed candidate is rejected
    data = json.loads(sol.read_text())
    data["z"][0] += 1.0
    sol.write_text(json.dumps(data))
    assert run(capsys, "verify", str(prob), "--solution", str(sol))[0] == EXIT_REJECT


def test_verify_enumerate(capsys):
    code, out = run(capsys, "verify", "example1", "--enumerate")
    assert code == EXIT_OK
    spairs = json.loads(out.out)["spairs"]
    assert [sp["alpha"] for sp in spairs] == [[3]]


def test_trace_table(capsys):
    code, out = run(capsys, "trace", "example1", "--force-sequence", "4,5,2,3", "--fractions")
    assert code == EXIT_OK
    lines = out.out.splitlines()
    assert lines[0].split()[:3] == ["iter", "z", "s"]
    assert len(lines) == 1 + 8


def test_trace_iteration_limit(capsys):
    code, out = run(capsys, "trace", "example1", "--force-sequence", "4,5,2,3", "--max-iter", "2")
    assert code == EXIT_ITERLIMIT
    assert len(out.out.splitlines()) == 3


def test_bench_small(capsys, tmp_path):
    steps = tmp_path / "steps.csv"
    code, out = run(capsys, "bench", "--scale", "3,5,6,2", "--reps", "2", "--no-timing",
                    "--steps-out", str(steps))
    assert code == EXIT_OK
    assert out.out.splitlines()[0].startswith("type,nx,ny,m,na")
    assert steps.read_text().startswith("nx,ny,m,na,rep,kind,seconds")


def test_attack_small(capsys, tmp_path):
    dest = tmp_path / "a.csv"
    code, _ = run(capsys, "attack", "--synthetic", "5,30,1", "--b-grid", "0,6,12",
                  "--trials", "20", "--out", str(dest))
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(dest.read_text())))
    assert len(rows) == 9
    assert {r["method"] for r in rows} == {"minimax", "random", "no-long"}


def test_attack_from_fixture(capsys):
    code, out = run(capsys, "attack", "--prices", str(FIXTURES / "market_prices.csv"),
                    "--volumes", str(FIXTURES / "market_volumes.csv"), "--b-grid", "4",
                    "--methods", "minimax", "--trials", "1")
    assert code == EXIT_OK
    assert len(out.out.splitlines()) == 2
    assert run(capsys, "attack", "--synthetic", "3,10,0", "--methods", "bogus")[0] == EXIT_INPUT
