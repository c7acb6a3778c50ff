import numpy as np
import pytest
from scipy.stats import multivariate_normal

from steinlab import gaussian, numlin, spectral
from steinlab.exceptions import InvalidDimensionError, NotPositiveDefiniteError

from conftest import random_pd


class TestModel:
    def test_identity_factors(self):
        model = gaussian.model_from_cov(np.eye(3))
        assert model.log_det == pytest.approx(0.0)
        assert np.allclose(model.sqrt_cov, np.eye(3))
        assert np.allclose(model.inv_sqrt_cov, np.eye(3))

    def test_identity_entropy(self):
        # differential entropy of N(0, I_n) is n/2 * (ln(2 pi) + 1)
        model = gaussian.model_from_cov(np.eye(4))
        assert model.entropy == pytest.approx(2.0 * (gaussian.LOG_2PI + 1.0))

    def test_diagonal_log_det(self):
        model = gaussian.model_from_cov(np.diag([2.0, 8.0]))
        assert model.log_det == pytest.approx(np.log(16.0))

    def test_non_pd_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            gaussian.model_from_cov(np.diag([1.0, 0.0]))


class TestDensity:
    def test_matches_scipy(self):
        cov = random_pd(5, seed=3)
        model = gaussian.model_from_cov(cov)
        oracle = multivariate_normal(mean=np.zeros(5), cov=cov)
        rng = np.random.default_rng(0)
        for _ in range(5):
            x = rng.standard_normal(5)
            assert gaussian.log_density(model, x) == pytest.approx(
                oracle.logpdf(x), abs=1e-10
            )

    def test_batch_matches_single(self):
        model = gaussian.model_from_cov(random_pd(4, seed=4))
        xs = np.random.default_rng(1).standard_normal((6, 4))
        batch = gaussian.log_density_batch(model, xs)
        singles = [gaussian.log_density(model, x) for x in xs]
        assert np.allclose(batch, singles, atol=1e-12)

    def test_wrong_shape_rejected(self):
        model = gaussian.model_from_cov(np.eye(3))
        with pytest.raises(InvalidDimensionError):
            gaussian.log_density(model, np.zeros(4))


class TestSample:
    def test_deterministic(self):
        model = gaussian.model_from_cov(np.eye(2))
        assert np.array_equal(
            gaussian.sample(model, seed=5, count=100),
            gaussian.sample(model, seed=5, count=100),
        )

    def test_sample_covariance_close(self):
        cov = np.array([[2.0, 0.8], [0.8, 1.0]])
        xs = gaussian.sample(gaussian.model_from_cov(cov), seed=6, count=200_000)
        emp = xs.T @ xs / xs.shape[0]
        assert np.max(np.abs(emp - cov)) < 0.03

    def test_bad_count_rejected(self):
        with pytest.raises(ValueError):
            gaussian.sample(gaussian.model_from_cov(np.eye(2)), seed=0, count=0)


class TestKl:
    def test_equal_covariances(self):
        cov = random_pd(6, seed=7)
        assert gaussian.kl_gaussian(cov, cov) == pytest.approx(0.0, abs=1e-10)

    def test_diagonal_closed_form(self):
        kappas = np.array([0.5, 2.0, 3.0])
        expected = 0.5 * np.sum(kappas - np.log(kappas) - 1.0)
        value = gaussian.kl_gaussian(np.diag(kappas), np.eye(3))
        assert value == pytest.approx(expected, abs=1e-12)

    def test_trace_logdet_oracle(self):
        cov_p = random_pd(5, seed=8)
        cov_q = random_pd(5, seed=9)
        inv_q = np.linalg.inv(cov_q)
        sign_p, logdet_p = np.linalg.slogdet(cov_p)
        sign_q, logdet_q = np.linalg.slogdet(cov_q)
        oracle = 0.5 * (np.trace(inv_q @ cov_p) - (logdet_p - logdet_q) - 5)
        assert gaussian.kl_gaussian(cov_p, cov_q) == pytest.approx(oracle, abs=1e-9)

    def test_asymmetry(self):
        cov_p = np.diag([2.0, 2.0])
        assert gaussian.kl_gaussian(cov_p, np.eye(2)) != pytest.approx(
            gaussian.kl_gaussian(np.eye(2), cov_p)
        )

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidDimensionError):
            gaussian.kl_gaussian(np.eye(2), np.eye(3))


class TestWhiten:
    def test_whitener_normalizes_q_and_diagonalizes_p(self):
        cov_p = random_pd(6, seed=10)
        cov_q = random_pd(6, seed=11)
        pair = gaussian.whiten(cov_p, cov_q)
        m = pair.whitener
        assert np.allclose(m @ cov_q @ m.T, np.eye(6), atol=1e-8)
        assert np.allclose(m @ cov_p @ m.T, np.diag(pair.kappas), atol=1e-8)

    def test_kappas_descending(self):
        pair = gaussian.whiten(random_pd(8, seed=12), random_pd(8, seed=13))
        assert np.all(np.diff(pair.kappas) <= 0.0)

    def test_kl_matches_direct(self):
        cov_p = random_pd(5, seed=14)
        cov_q = random_pd(5, seed=15)
        pair = gaussian.whiten(cov_p, cov_q)
        assert pair.kl == pytest.approx(gaussian.kl_gaussian(cov_p, cov_q), abs=1e-10)

    def test_b_n(self):
        pair = gaussian.diagonal_pair([3.0, 1.0, 0.5])
        assert pair.b_n == pytest.approx(np.hypot(2.0, 0.5), abs=1e-12)

    def test_diagonal_pair_recovers_kappas(self):
        kappas = [4.0, 2.0, 0.25]
        pair = gaussian.diagonal_pair(kappas)
        assert np.allclose(pair.kappas, kappas, atol=1e-10)

    def test_toeplitz_pair_kappas_within_spectrum_bounds(self, geo_half):
        s = geo_half.spectrum()
        pair = gaussian.whiten(numlin.toeplitz_from_cov(geo_half, 32), np.eye(32))
        assert np.all(pair.kappas >= s.lower - 1e-10)
        assert np.all(pair.kappas <= s.upper + 1e-10)


class TestLlr:
    def test_matches_density_difference(self):
        pair = gaussian.whiten(random_pd(4, seed=16), random_pd(4, seed=17))
        x = np.random.default_rng(2).standard_normal(4)
        expected = gaussian.log_density(pair.p, x) - gaussian.log_density(pair.q, x)
        assert gaussian.llr(pair, x) == pytest.approx(expected, abs=1e-12)

    def test_diagonal_closed_form(self):
        # for p = N(0, diag(kappa)), q = N(0, I):
        # llr(x) = 0.5 sum (1 - 1/kappa) x^2 - 0.5 sum log kappa
        kappas = np.array([2.0, 0.5])
        pair = gaussian.diagonal_pair(kappas)
        x = np.array([1.0, -2.0])
        expected = 0.5 * np.sum((1.0 - 1.0 / kappas) * x**2) - 0.5 * np.sum(
            np.log(kappas)
        )
        assert gaussian.llr(pair, x) == pytest.approx(expected, abs=1e-12)

    def test_batch_matches_single(self):
        pair = gaussian.whiten(random_pd(3, seed=18), np.eye(3))
        xs = np.random.default_rng(3).standard_normal((5, 3))
        assert np.allclose(
            gaussian.llr_batch(pair, xs),
            [gaussian.llr(pair, x) for x in xs],
            atol=1e-12,
        )

    def test_mean_under_p_is_kl(self):
        pair = gaussian.diagonal_pair([2.0, 0.5, 1.5])
        xs = gaussian.sample(pair.p, seed=19, count=200_000)
        mean = float(np.mean(gaussian.llr_batch(pair, xs)))
        assert mean == pytest.approx(pair.kl, abs=0.02)
