import numpy as np
import pytest

from bilinext import OptimizerConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cfg():
    return OptimizerConfig(restarts=32, seed=7)


def circle(n=20000):
    """Points of the Euclidean unit circle, for grid oracles."""
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.stack([np.cos(t), np.sin(t)], axis=1)
