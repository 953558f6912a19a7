import numpy as np
import pytest

from carnotext.allcock import build_allcock, heisenberg_model
from carnotext.paths import SampledPath


def figure_eight(n, dim=4, scale=1.0):
    t = np.linspace(0, 1, n + 1)
    c = np.zeros((n + 1, dim))
    c[:, 0] = scale * np.sin(2 * np.pi * t)
    c[:, 1] = scale * 0.5 * np.sin(4 * np.pi * t)
    c[-1] = c[0]
    return SampledPath(c, closed=True)


def circle(n, dim=2, radius=1.0, plane=(0, 1), based=True):
    t = np.linspace(0, 1, n + 1)
    c = np.zeros((n + 1, dim))
    c[:, plane[0]] = radius * (np.cos(2 * np.pi * t) - (1 if based else 0))
    c[:, plane[1]] = radius * np.sin(2 * np.pi * t)
    c[-1] = c[0]
    return SampledPath(c, closed=True)


@pytest.fixture(scope="session")
def H2():
    return build_allcock(heisenberg_model(), 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
