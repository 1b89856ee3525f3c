import numpy as np
import pytest

from capillary.thermo import Polytropic, VanDerWaals

ACCEPTANCE_LINES: list[str] = []


def central_gradient(f, x, rel_step):
    """Central differences with step ``rel_step * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    out = []
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.array(out).T


def max_rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


@pytest.fixture
def poly():
    return Polytropic(K=1.0, gamma=2.0)


@pytest.fixture
def vdw():
    return VanDerWaals()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
