import numpy as np
import pytest

from repeated_interactions.model import SpaceDims
from repeated_interactions.scenarios import random_params


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[0, 1, 2, 3, 4])
def seeded_params(request):
    return random_params(SpaceDims(2, 2), np.random.default_rng(request.param))
