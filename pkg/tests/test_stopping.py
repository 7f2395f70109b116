import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fastme.errors import ConfigError, DegenerateDataError
from fastme.stopping import (
    ATTENTION_CLAMP,
    DeltaBoundWarning,
    SadSampleSet,
    StoppingPolicy,
    adaptive_delta,
    blended_cost,
    check_delta_bound,
    empirical_cdf,
    fit_exponential_rate,
    fixed_point_tau,
    sad_threshold,
    should_stop_empirical,
    should_stop_fastme,
)


class TestEmpiricalCdf:
    def test_half(self):
        assert empirical_cdf([1, 2, 3, 4], 2.5) == 0.5

    def test_below_min(self):
        assert empirical_cdf([5, 6, 7], 4.9) == 0.0

    def test_at_max(self):
        assert empirical_cdf([5, 6, 7], 7) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(DegenerateDataError):
            empirical_cdf([], 1.0)

    def test_monotone_random_multisets(self):
        # 1000 random multisets: F nondecreasing, F(max) = 1, F(min - 1) = 0.
        rng = np.random.default_rng(42)
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            values = np.round(rng.exponential(100.0, n), 1)
            s = SadSampleSet(values)
            probes = np.sort(rng.uniform(-1, values.max() + 1, 8))
            cdfs = [s.cdf(y) for y in probes]
            assert all(a <= b for a, b in zip(cdfs, cdfs[1:]))
            assert s.cdf(values.max()) == 1.0
            assert s.cdf(values.min() - 1) == 0.0


class TestFitExponentialRate:
    def test_constant_samples(self):
        assert fit_exponential_rate([2.0, 2.0, 2.0]) == pytest.approx(0.5)

    def test_two_samples(self):
        assert fit_exponential_rate([1.0, 3.0]) == pytest.approx(0.5)

    def test_monte_carlo_recovery(self):
        rng = np.random.default_rng(1234)
        draws = rng.exponential(scale=0.5, size=100_000)  # rate 2
        rate = fit_exponential_rate(draws)
        assert 1.96 <= rate <= 2.04

    def test_all_zero_degenerate(self):
        with pytest.raises(DegenerateDataError):
            fit_exponential_rate([0.0, 0.0])

    @given(st.floats(0.1, 50.0))
    def test_scale_equivariance(self, c):
        base = [1.0, 2.0, 5.0, 9.0]
        r1 = fit_exponential_rate(base)
        r2 = fit_exponential_rate([c * v for v in base])
        assert r2 == pytest.approx(r1 / c, rel=1e-9)


class TestSadThreshold:
    def test_reference_value(self):
        assert sad_threshold(0.05, 1.0) == pytest.approx(-math.log(0.05), abs=1e-12)

    def test_delta_one(self):
        assert sad_threshold(1.0, 3.7) == 0.0

    def test_tiny_theta(self):
        assert sad_threshold(0.05, 0.001) == pytest.approx(2995.7322735539909)

    def test_domain(self):
        with pytest.raises(ValueError):
            sad_threshold(0.0, 1.0)
        with pytest.raises(ValueError):
            sad_threshold(0.5, 0.0)

    def test_decreasing_in_delta_and_theta(self):
        deltas = np.linspace(0.01, 0.99, 25)
        ts = [sad_threshold(d, 1.0) for d in deltas]
        assert all(a > b for a, b in zip(ts, ts[1:]))
        thetas = np.linspace(0.5, 5.0, 25)
        ts = [sad_threshold(0.05, t) for t in thetas]
        assert all(a > b for a, b in zip(ts, ts[1:]))


class TestAdaptiveDelta:
    def test_zero_attention_is_identity(self):
        assert adaptive_delta(0.05, 0.0) == pytest.approx(0.05)

    def test_linear(self):
        assert adaptive_delta(0.05, 0.5) == pytest.approx(0.025)

    def test_full_attention_clamped(self):
        d = adaptive_delta(0.05, 1.0)
        assert d == pytest.approx(0.05 * (1 - ATTENTION_CLAMP))
        assert d > 0
        assert math.isfinite(sad_threshold(d, 1.0))

    def test_monotone_100_point_sweep(self):
        scores = np.linspace(0.0, 1.0, 100)
        deltas = [adaptive_delta(0.05, a) for a in scores]
        assert all(a >= b for a, b in zip(deltas, deltas[1:]))
        thresholds = [sad_threshold(d, 1.0) for d in deltas]
        assert all(a <= b for a, b in zip(thresholds, thresholds[1:]))


class TestBlendedCost:
    def test_reference_value(self):
        assert blended_cost(0.2, 0.9, 0.7) == pytest.approx(0.17)

    def test_alpha_one_is_distortion(self):
        assert blended_cost(0.37, 0.9, 1.0) == pytest.approx(0.37)

    def test_alpha_zero_is_inverse_saliency(self):
        assert blended_cost(0.37, 0.9, 0.0) == pytest.approx(0.1)

    def test_argmin_matches_distortion_argmin(self):
        # For fixed attention and alpha > 0 the blend is affine in Y.
        rng = np.random.default_rng(5)
        ys = rng.random(50)
        blends = [blended_cost(y, 0.6, 0.7) for y in ys]
        assert int(np.argmin(blends)) == int(np.argmin(ys))


class TestFixedPoint:
    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_collapses_to_zero(self, theta):
        result = fixed_point_tau(theta, tol=1e-10)
        assert abs(result.tau) <= 1e-10
        assert result.residual < 1e-10
        assert result.iterations <= 10_000

    def test_residual_definition(self):
        r = fixed_point_tau(1.0)
        g = -math.expm1(-r.tau)
        assert abs(g - r.tau) == pytest.approx(r.residual)

    def test_domain(self):
        with pytest.raises(ValueError):
            fixed_point_tau(0.0)
        with pytest.raises(ValueError):
            fixed_point_tau(1.0, tol=0.0)


class TestSequentialRules:
    def test_first_sample_always_stops(self):
        s = SadSampleSet()
        s.add(123.0)
        assert should_stop_empirical(s, 123.0, 0.05) is True

    def test_low_value_does_not_stop(self):
        s = SadSampleSet([10, 20, 30])
        assert should_stop_empirical(s, 10, 0.05) is False

    def test_max_with_loose_delta_stops(self):
        s = SadSampleSet([10, 20, 30])
        assert should_stop_empirical(s, 30, 0.5) is True

    def test_fastme_both_conditions(self):
        assert should_stop_fastme(0.1, 0.5, 100, math.inf) is True

    def test_fastme_cost_above_boundary(self):
        assert should_stop_fastme(0.6, 0.5, 0, math.inf) is False

    def test_fastme_strict_improvement(self):
        assert should_stop_fastme(0.1, 0.5, 40, 40) is False


class TestPolicyAndBounds:
    def test_policy_defaults(self):
        p = StoppingPolicy()
        assert p.delta0 == 0.05
        assert p.alpha == 0.7
        assert not p.fits_theta

    def test_policy_fit_sentinel(self):
        assert StoppingPolicy(theta="fit").fits_theta

    def test_policy_validation(self):
        with pytest.raises(ConfigError):
            StoppingPolicy(delta0=0.0)
        with pytest.raises(ConfigError):
            StoppingPolicy(theta=-2.0)
        with pytest.raises(ConfigError):
            StoppingPolicy(alpha=1.5)
        with pytest.raises(ConfigError):
            StoppingPolicy(rule="bogus")

    def test_delta_bound_warns(self):
        with pytest.warns(DeltaBoundWarning):
            ok = check_delta_bound(0.01, y_limit=0.95)
        assert ok is False

    def test_delta_bound_satisfied(self):
        assert check_delta_bound(0.05, y_limit=0.95) is True

    def test_sample_set_rejects_negative(self):
        with pytest.raises(ValueError):
            SadSampleSet([-1.0])
