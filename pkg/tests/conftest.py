import numpy as np
import pytest
from hypothesis import settings

from sgnlab import Grid, Params

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def periodic_grid():
    return Grid.from_length(256, 2.0 * np.pi, 0.0, "periodic")


@pytest.fixture
def line_grid():
    return Grid.from_length(512, 40.0, -20.0, "line")


@pytest.fixture
def params():
    return Params(g=9.81, gamma=9.81, hbar=1.0, epsilon=0.0)


def smooth_periodic_field(g, rng, kmax=6, amplitude=1.0):
    """Random band-limited field on a periodic grid."""
    x = g.cells()
    f = np.zeros(g.n)
    for k in range(1, kmax + 1):
        a, b = rng.standard_normal(2) / k**2
        f += a * np.cos(2 * np.pi * k * x / g.length) + b * np.sin(2 * np.pi * k * x / g.length)
    return amplitude * f


def bump_field(g, rng=None, width=3.0, amplitude=1.0, center=None):
    """Smooth compactly-decaying field for line-mode tests."""
    x = g.cells()
    c = 0.5 * (g.x_left + g.x_right) if center is None else center
    return amplitude * np.exp(-(((x - c) / width) ** 2))


def convergence_orders(errors):
    e = np.asarray(errors, dtype=float)
    return list(np.log2(e[:-1] / e[1:]))
