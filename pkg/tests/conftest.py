import numpy as np
import pytest

from slext.core import InverseSquare, solve_ivp


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Load the compiled integrator once so timed tests measure solving only."""
    solve_ivp(InverseSquare(0.5), -1.0, 1.0, 1.0, 0.0, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, in criterion order."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
