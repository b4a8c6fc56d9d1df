import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from logpot import field_catalog, solve_equilibrium  # noqa: E402

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def cauchy_result():
    return solve_equilibrium(field_catalog("cauchy-log"), -40.0, 40.0, 2048)


@pytest.fixture(scope="session")
def semicircle_result():
    """Equilibrium for V = x^2: density (2/pi) sqrt(1 - x^2) on [-1, 1]."""
    return solve_equilibrium(field_catalog("quadratic", t=1.0), -3.0, 3.0, 2048)


@pytest.fixture(scope="session")
def arctan_result():
    return solve_equilibrium(field_catalog("arctan"), -10.0, 10.0, 2048)


@pytest.fixture
def acceptance():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")


def sup_on(mask, a, b):
    return float(np.max(np.abs(np.asarray(a)[mask] - np.asarray(b)[mask])))
