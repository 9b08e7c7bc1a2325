import numpy as np
import pytest

from wfexcursions.wfmodel import make_theta

THETA_GRID = [(a, b) for a in (0.3, 0.5, 0.7) for b in (0.3, 0.5, 0.7)]


@pytest.fixture
def rng():
    return np.random.default_rng(np.random.SeedSequence(12345))


@pytest.fixture
def theta_ref():
    return make_theta(0.3, 0.7)
