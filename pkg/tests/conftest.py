import numpy as np
import pytest

from lobq.model import ModelParams, QueueDist


@pytest.fixture
def params_unbalanced():
    return ModelParams.from_rates(1.0, 2.0)


@pytest.fixture
def params_near_balanced():
    return ModelParams.from_rates(12.0, 13.0)


@pytest.fixture
def params_balanced():
    return ModelParams.from_rates(10.0, 10.0)


@pytest.fixture
def f_symmetric():
    return QueueDist([(1, 1, 0.25), (1, 2, 0.25), (2, 1, 0.25), (2, 2, 0.25)])


@pytest.fixture
def f_point():
    return QueueDist.point_mass(2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(np.random.Philox(12345))
