import numpy as np
import pytest

from photonsource.params import RAF, Piecewise, SquarePulse


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_field(rng, kind):
    """Random control field of the given kind with moderate parameters."""
    if kind == "square":
        return SquarePulse(float(rng.uniform(0, 5)), float(rng.uniform(0.1, 10)))
    if kind == "raf":
        nu = float(rng.uniform(0.1, 0.5))
        return RAF(float(rng.uniform(0, 5)), float(rng.uniform(0, 100)), nu,
                   phase=float(rng.uniform(0, 2 * np.pi)))
    n = int(rng.integers(2, 7))
    ts = np.cumsum(rng.uniform(0.2, 2.0, n))
    return Piecewise(tuple((float(t), float(rng.uniform(0, 4)), float(rng.uniform(-3, 3)))
                           for t in ts))
