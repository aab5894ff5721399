import numpy as np
import pytest

from shallowboson.linalg import ComplexMatrix
from shallowboson.photonics import compose_circuit, random_shallow_circuit

PERFECT_MATCHINGS_3 = [[1, 1, 1], [1, 1, 0], [0, 1, 1]]


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def banded_matrix(rng, n, lower, upper, n_cols=None):
    """Random complex matrix with a structural band; entries inside the band are nonzero."""
    n_cols = n if n_cols is None else n_cols
    i, j = np.indices((n, n_cols))
    mask = (i - j <= lower) & (j - i <= upper)
    data = np.where(mask, random_complex(rng, (n, n_cols)), 0)
    return ComplexMatrix(data, structure=mask)


def shallow_unitary(m, depth, seed):
    return compose_circuit(random_shallow_circuit(m, depth, np.random.default_rng(seed)))


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
