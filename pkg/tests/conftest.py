import numpy as np
import pytest

from steinlab import gaussian, numlin, spectral


@pytest.fixture(scope="session")
def geo_half():
    return spectral.CovarianceSequence.geometric(0.5)


@pytest.fixture(scope="session")
def white():
    return spectral.CovarianceSequence.white()


@pytest.fixture(scope="session")
def pair_rho_half_n64(geo_half):
    lam_p = numlin.toeplitz_from_cov(geo_half, 64)
    return gaussian.whiten(lam_p, np.eye(64))


def random_pd(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)
