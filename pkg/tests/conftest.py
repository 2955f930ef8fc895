import numpy as np
import pytest

from loccact.states import StateSet
from loccact.tensor_core import DimensionSignature, basis_ket


def kets(*dims):
    return lambda *idx: basis_ket(idx, dims)


def make_set(dims, vectors, labels=None):
    return StateSet.from_vectors(DimensionSignature.of(*dims), vectors, labels)


@pytest.fixture
def bell_triple():
    k = kets(2, 2)
    return make_set((2, 2), [k(0, 0) + k(1, 1), k(0, 0) - k(1, 1), k(0, 1) - k(1, 0)])


@pytest.fixture
def product_basis():
    k = kets(2, 2)
    return make_set((2, 2), [k(0, 0), k(0, 1), k(1, 0), k(1, 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
