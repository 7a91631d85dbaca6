import cmath

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pytest

from markoff.algebra import MarkoffTriple, MuParams

SEED_MUS = [
    MuParams(0, -1, -1, 4),
    MuParams(0, -1, 0, 20),
    MuParams(3, -2, -2, -5),
]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def markoff_mu():
    return MuParams(0, 0, 0, 0)


@pytest.fixture
def markoff_triple():
    return MarkoffTriple(-3, -3, -3)


def random_complex(rng, scale=3.0):
    return complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale))


def solve_z(mu, x, y, plus=True):
    """A z completing (x, y) to a point of the variety."""
    b = x * y - mu.r
    c = x * x + y * y - mu.p * x - mu.q * y - mu.s
    root = cmath.sqrt(b * b - 4 * c)
    return (-b + root) / 2 if plus else (-b - root) / 2


def on_variety(rng, mu, x=None, scale=3.0):
    x = random_complex(rng, scale) if x is None else x
    y = random_complex(rng, scale)
    return MarkoffTriple(x, y, solve_z(mu, x, y))
