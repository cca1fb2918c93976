import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from floydlab import Microstate

settings.register_profile(
    "floydlab",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("floydlab")


@st.composite
def microstates(draw, max_log=1.5):
    la = draw(st.floats(-max_log, max_log))
    lb = draw(st.floats(-max_log, max_log))
    a, b = math.exp(la), math.exp(lb)
    frac = draw(st.floats(-0.95, 0.95))
    return Microstate(a, b, 2.0 * math.sqrt(a * b) * frac)


def random_microstates(rng, n, max_log=1.5):
    out = []
    for _ in range(n):
        a, b = np.exp(rng.uniform(-max_log, max_log, 2))
        c = 2.0 * math.sqrt(a * b) * rng.uniform(-0.95, 0.95)
        out.append(Microstate(float(a), float(b), float(c)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


# Acceptance verdicts, printed once at the end of the session.
ACCEPTANCE: list[str] = []


def record_criterion(number, title, error, tol):
    """Store and print one verdict line; returns whether error <= tol."""
    ok = bool(error <= tol)
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: error={error:.3g} tol={tol:.3g}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
