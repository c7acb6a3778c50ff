import math

import numpy as np
import pytest
from scipy.stats import norm

from steinlab import gaussian, numlin, typicality
from steinlab.exceptions import DegeneratePairError, VacuousBoundError


class TestQfunc:
    def test_values(self):
        assert typicality.qfunc(0.0) == pytest.approx(0.5)
        assert typicality.qfunc(1.6448536269514722) == pytest.approx(0.05, abs=1e-12)

    def test_matches_scipy_sf(self):
        for x in (-2.0, -0.3, 0.0, 1.0, 3.5):
            assert typicality.qfunc(x) == pytest.approx(norm.sf(x), abs=1e-14)

    def test_inverse_roundtrip(self):
        for p in (1e-6, 0.025, 0.5, 0.9):
            assert typicality.qfunc(typicality.qfunc_inv(p)) == pytest.approx(
                p, rel=1e-10
            )

    def test_inverse_domain(self):
        for p in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                typicality.qfunc_inv(p)


class TestScalarFamily:
    def test_values(self):
        assert typicality.ScalarFamily.constant(2.0).value(100) == 2.0
        assert typicality.ScalarFamily.linear(0.5).value(10) == 5.0
        assert typicality.ScalarFamily.sqrt_scaled(3.0).value(4) == 6.0
        fam = typicality.ScalarFamily.bn_scaled(2.0, lambda n: float(n))
        assert fam.value(7) == 14.0
        assert typicality.ScalarFamily.tabulated({8: 1.5}).value(8) == 1.5

    def test_validation(self):
        with pytest.raises(ValueError):
            typicality.ScalarFamily.constant(-1.0)
        with pytest.raises(ValueError):
            typicality.ScalarFamily(kind="nope")
        with pytest.raises(ValueError):
            typicality.ScalarFamily.tabulated({})
        with pytest.raises(ValueError):
            typicality.ScalarFamily.constant(1.0).value(0)

    def test_classification(self):
        good = typicality.GOOD_FOR_ALL_CONSTANTS
        not_good = typicality.NOT_GOOD_FOR_ALL_CONSTANTS
        assert typicality.family_class(typicality.ScalarFamily.linear(0.1)).label == good
        for fam in (
            typicality.ScalarFamily.constant(5.0),
            typicality.ScalarFamily.sqrt_scaled(1.0),
            typicality.ScalarFamily.bn_scaled(1.0, math.sqrt),
        ):
            result = typicality.family_class(fam)
            assert result.label == not_good
            assert not result.heuristic

    def test_table_classification_is_heuristic(self):
        growing = typicality.ScalarFamily.tabulated({4: 1.0, 64: 40.0})
        flat = typicality.ScalarFamily.tabulated({4: 2.0, 64: 8.0})
        assert typicality.family_class(growing).heuristic
        assert (
            typicality.family_class(growing).label == typicality.GOOD_FOR_ALL_CONSTANTS
        )
        assert (
            typicality.family_class(flat).label
            == typicality.NOT_GOOD_FOR_ALL_CONSTANTS
        )


class TestMembership:
    def test_entropy_member_at_typical_radius(self):
        model = gaussian.model_from_cov(np.eye(2))
        # -log p(x) = log(2 pi) + |x|^2 / 2; entropy = log(2 pi) + 1
        assert typicality.entropy_typical_member(model, 0.5, np.array([1.0, 1.0]))
        assert not typicality.entropy_typical_member(model, 0.5, np.array([3.0, 3.0]))

    def test_rel_member(self):
        pair = gaussian.diagonal_pair([2.0, 2.0])
        # llr(x) = 0.25 |x|^2 - log 2, kl = 0.5 (2 - log 2 - 1) * 2 / 2 ...
        x_center = np.sqrt((pair.kl + np.log(2.0)) * 4.0 / 2.0) * np.ones(2)
        assert typicality.rel_typical_member(pair, 1e-6, x_center)
        assert not typicality.rel_typical_member(pair, 0.1, 100.0 * x_center)

    def test_nonpositive_delta_rejected(self):
        model = gaussian.model_from_cov(np.eye(2))
        with pytest.raises(ValueError):
            typicality.entropy_typical_member(model, 0.0, np.zeros(2))


class TestGoodDeltas:
    def test_iid_closed_form(self):
        value = typicality.good_delta_iid(2.0, 25, 0.05)
        assert value == pytest.approx(2.0 * 5.0 * typicality.qfunc_inv(0.025))

    def test_white_gaussian_is_iid_with_half_variance(self):
        # the entropy statistic per coordinate has variance 1/2
        n, eps = 64, 0.1
        assert typicality.good_delta_white_gaussian(n, eps) == pytest.approx(
            typicality.good_delta_iid(math.sqrt(0.5), n, eps)
        )

    def test_correlated_uses_b_n(self):
        pair = gaussian.diagonal_pair([3.0, 1.0])
        result = typicality.good_delta_correlated(pair, 0.2)
        assert result.b_n == pytest.approx(2.0)
        assert result.delta == pytest.approx(
            2.0 / math.sqrt(2.0) * typicality.qfunc_inv(0.1)
        )

    def test_degenerate_pair_rejected(self):
        pair = gaussian.diagonal_pair([1.0, 1.0])
        with pytest.raises(DegeneratePairError):
            typicality.good_delta_correlated(pair, 0.1)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            typicality.good_delta_iid(0.0, 4, 0.1)
        with pytest.raises(ValueError):
            typicality.good_delta_white_gaussian(4, 0.0)


class TestMonteCarlo:
    def test_white_entropy_coverage(self):
        n, eps = 64, 0.1
        model = gaussian.model_from_cov(np.eye(n))
        delta = typicality.good_delta_white_gaussian(n, eps)
        spec = typicality.TypicalSetSpec.entropy(model, delta)
        result = typicality.mc_typical_prob(spec, count=20_000, seed=21)
        assert abs(result.estimate - (1.0 - eps)) < 4.0 * result.stderr + 0.01

    def test_rel_entropy_coverage(self):
        eps = 0.1
        pair = gaussian.diagonal_pair(np.linspace(0.5, 2.0, 32))
        delta = typicality.good_delta_correlated(pair, eps).delta
        spec = typicality.TypicalSetSpec.relative_entropy(pair, delta)
        result = typicality.mc_typical_prob(spec, count=20_000, seed=22)
        assert abs(result.estimate - (1.0 - eps)) < 4.0 * result.stderr + 0.02

    def test_deterministic(self):
        model = gaussian.model_from_cov(np.eye(8))
        spec = typicality.TypicalSetSpec.entropy(model, 1.0)
        a = typicality.mc_typical_prob(spec, count=2000, seed=5)
        b = typicality.mc_typical_prob(spec, count=2000, seed=5)
        assert a.estimate == b.estimate

    def test_small_count_rejected(self):
        model = gaussian.model_from_cov(np.eye(2))
        spec = typicality.TypicalSetSpec.entropy(model, 1.0)
        with pytest.raises(ValueError):
            typicality.mc_typical_prob(spec, count=999, seed=0)


class TestBoundFormulas:
    def test_volume_bounds(self):
        b = typicality.volume_bounds(h=2.0, delta=0.5, eps=0.1)
        assert b.log_upper == pytest.approx(2.5)
        assert b.log_lower == pytest.approx(math.log(0.9) + 1.5)
        assert b.upper == pytest.approx(math.exp(2.5))
        assert b.lower == pytest.approx(0.9 * math.exp(1.5))

    def test_volume_bounds_overflow_to_inf(self):
        b = typicality.volume_bounds(h=1000.0, delta=1.0, eps=0.0)
        assert b.upper == math.inf
        assert b.log_upper == pytest.approx(1001.0)

    def test_other_set_volume_lb(self):
        lb = typicality.other_set_volume_lb(h=3.0, delta=1.0, eps=0.1, eps2=0.2)
        assert lb.log_value == pytest.approx(math.log(0.7) + 2.0)

    def test_other_set_vacuous(self):
        with pytest.raises(VacuousBoundError):
            typicality.other_set_volume_lb(h=0.0, delta=1.0, eps=0.6, eps2=0.5)

    def test_q_prob_bounds(self):
        b = typicality.q_prob_bounds(kl=5.0, delta=0.5, eps=0.1)
        assert b.log_upper == pytest.approx(-4.5)
        assert b.log_lower == pytest.approx(math.log(0.9) - 5.5)
        assert b.lower <= b.upper

    def test_negative_delta_rejected(self):
        for fn in (
            lambda: typicality.volume_bounds(0.0, -1.0, 0.1),
            lambda: typicality.q_prob_bounds(1.0, -1.0, 0.1),
        ):
            with pytest.raises(ValueError):
                fn()


class TestCltCheck:
    def test_passes_for_large_n(self, geo_half):
        # the chi-square skewness is still visible at n=64; 256 is comfortably
        # inside the normal regime at this sample size
        pair = gaussian.whiten(
            numlin.toeplitz_from_cov(geo_half, 256), np.eye(256)
        )
        result = typicality.clt_psi_check(pair, count=20_000, seed=23)
        assert result.passed
        assert abs(result.mean) < 0.05
        assert abs(result.variance - 1.0) < 0.1

    def test_degenerate_pair_rejected(self):
        pair = gaussian.diagonal_pair([1.0, 1.0, 1.0])
        with pytest.raises(DegeneratePairError):
            typicality.clt_psi_check(pair, count=10_000, seed=0)

    def test_small_count_rejected(self, pair_rho_half_n64):
        with pytest.raises(ValueError):
            typicality.clt_psi_check(pair_rho_half_n64, count=5000, seed=0)
