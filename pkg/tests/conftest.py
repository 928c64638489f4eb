import math

import pytest

from fluxon import ModeSpec, Tanh


@pytest.fixture
def unit_tanh():
    """Tanh(A=2.5, B=1.5, rho=1) with k = 0, m = 1: omega 1 -> 2."""
    return Tanh(2.5, 1.5, 1.0), ModeSpec(k=0.0, omega_in=1.0, omega_out=2.0)


def rel(a, b):
    return abs(a - b) / abs(b)


REF_OMEGA_IN = 0.21e12
REF_OMEGA_OUT = 0.25e12
SUDDEN_REF = 0.04 ** 2 / (4 * 0.21 * 0.25)
assert math.isclose(SUDDEN_REF, 0.0076190476190476190, rel_tol=1e-15)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
