import numpy as np
import pytest


def random_symmetric(rng, V):
    B = rng.standard_normal((V, V))
    return 0.5 * (B + B.T)


def random_orthonormal(rng, V, K):
    Q, R = np.linalg.qr(rng.standard_normal((V, K)))
    return Q * np.sign(np.diag(R))


def random_orthonormal_batch(rng, count, V, K):
    """(count, V, K) Haar-distributed orthonormal frames."""
    G = rng.standard_normal((count, V, K))
    Q, R = np.linalg.qr(G)
    s = np.sign(np.einsum("ikk->ik", R))
    return Q * s[:, None, :]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
