import numpy as np
import pytest

from corrtree.core_types import DataSet, WeightBank


@pytest.fixture
def tiny():
    """x1=(1,0), x2=(0,1); w1=(2,-1), w2=(-3,4)."""
    X = DataSet(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
    W = WeightBank(np.array([[2.0, -1.0], [-3.0, 4.0]]))
    return W, X


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
