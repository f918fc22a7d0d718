import math

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture
def imazu_speed():
    return 25 * 1852.0 / 3600.0


def approx_vec(a, b, tol=1e-9):
    return math.hypot(a[0] - b[0], a[1] - b[1]) <= tol


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Record one pass/fail line per acceptance criterion; shown in the terminal summary."""

    def record(n, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
