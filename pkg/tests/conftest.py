import numpy as np
import pytest

from latent_oce import Dag, make_model
from latent_oce.verification import binary_model, three_binary_model


@pytest.fixture
def binary():
    return binary_model()


@pytest.fixture
def three_binary():
    return three_binary_model()


@pytest.fixture
def chain3():
    dag = Dag(3, frozenset({(1, 2), (2, 3)}))
    return make_model(dag, {(1, 2): 0.7, (2, 3): -0.6}, [[-0.5, 0.4], [0.0], [-1.0, 0.1, 0.9]])


@pytest.fixture
def fork():
    dag = Dag(3, frozenset({(1, 2), (1, 3)}))
    return make_model(dag, {(1, 2): 0.8, (1, 3): 0.5}, [[0.0], [0.3, 1.0], [-0.2]], mu=[0.5, -0.2, 1.0],
                      v=[1.5, 0.7, 2.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
