import numpy as np
import pytest

from whitham_boussinesq import make_grid, petviashvili_solve

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    def record(label, passed, detail):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"{status}  {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def soliton_grid():
    return make_grid(2048, 256.0)


@pytest.fixture(scope="session")
def soliton_125(soliton_grid):
    return petviashvili_solve(1.25, soliton_grid)


@pytest.fixture(scope="session")
def soliton_110(soliton_grid):
    return petviashvili_solve(1.1, soliton_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
