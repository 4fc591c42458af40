import numpy as np
import pytest

from unbounded_dde import SolverConfig


@pytest.fixture
def cfg():
    return SolverConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
