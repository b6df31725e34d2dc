import numpy as np
import pytest
from hypothesis import settings

from qpathdim.gaussian_state import GaussianState
from qpathdim.oracle_grid import GridSpec

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid_for(*states, n=4096, include=()):
    return GridSpec.covering(states, n=n, include=include)


def centred_grid(half_width, n):
    """Grid with a node exactly at x = 0."""
    h = 2.0 * half_width / n
    return GridSpec(x0=-h * (n // 2), dx_grid=h, n=n)


@pytest.fixture
def gaussian():
    return GaussianState(a=0.4, b_mom=-0.8, delta=1.3, eps=0.6)
