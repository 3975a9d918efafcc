from pathlib import Path

import numpy as np
import pytest

from mmqp import kernels
from mmqp.problem import load_problem

FIXTURES = Path(__file__).parent / "fixtures"
DATA = Path(__file__).parent.parent / "src" / "mmqp" / "data"

_CRITERIA = {}


@pytest.fixture
def example1():
    return load_problem(DATA / "example1.json")


@pytest.fixture
def example2():
    return load_problem(DATA / "example2.json")


@pytest.fixture
def infeasible_problem():
    return load_problem(FIXTURES / "infeasible.json")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run a test once per importable Givens backend."""
    monkeypatch.setattr(kernels, "retriangularize", kernels.available_backends()[request.param])
    return request.param


@pytest.fixture
def criterion():
    """Record an acceptance outcome; the summary prints one line per criterion."""
    def report(number, ok, detail=""):
        _CRITERIA[number] = (bool(ok), detail)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
