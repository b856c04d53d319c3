import numpy as np
import pytest

from roughlab import make_grid, rough_identity
from roughlab.calculus import lift_integrand, sin_field
from roughlab.lift import SignalSpec, signal_path

ACCEPTANCE = {}


def bm_path(n=256, d=1, seed=0, alpha=0.45, trial=0):
    return signal_path(SignalSpec("bm", d, seed=seed), make_grid(1.0, n), alpha, trial)


def sin_integrand(R, seed=0):
    """G(X) with a random sin field G: R^d -> L(R^d, R^d)."""
    gen = np.random.default_rng(seed)
    d = R.d
    return lift_integrand(sin_field(gen.normal(size=(d, d, d)), gen.normal(size=(d, d))), R)


@pytest.fixture
def bm2():
    return bm_path(512, d=2, seed=11)


@pytest.fixture
def bm1():
    return bm_path(512, d=1, seed=5)


@pytest.fixture
def pair2(bm2):
    return sin_integrand(bm2, 3), rough_identity(bm2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
