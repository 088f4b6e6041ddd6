import numpy as np
import pytest

from kimuralab.operator import CoefficientSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def L1():
    """x a u_xx + b u_x with a = 1, b = 0.5."""
    return CoefficientSet.from_mapping(1, 0, {"a1": "1", "b1": "0.5"})


@pytest.fixture
def L11():
    return CoefficientSet.from_mapping(1, 1, {"a1": "1", "b1": "0.5", "d11": "1"})
