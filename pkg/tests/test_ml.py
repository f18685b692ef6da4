"""Closed-form ML estimators against brute-force grid maximization."""

import math

import numpy as np
import pytest

from oracles import grid_ml_location, grid_ml_theta, likelihood_exponent

from clocksync.likelihoods import Exponential, Gaussian, LogNormal
from clocksync.ml import ml_constrained, ml_theta, ml_unconstrained


class TestUnconstrained:
    def test_gaussian_mean(self):
        model = Gaussian(0.1)
        est = ml_unconstrained([1.0, 2.0, 3.0], model)
        assert est == pytest.approx(2.0, abs=1e-12)
        oracle = grid_ml_location(np.array([1.0, 2.0, 3.0]), model, 0.0, 4.0, 1e-4)
        assert abs(est - oracle) <= 1e-4

    def test_lognormal_identical_samples(self):
        est = ml_unconstrained([math.e, math.e, math.e], LogNormal(0.5))
        assert est == pytest.approx(1.0, rel=1e-12)

    def test_single_sample(self):
        assert ml_unconstrained([0.37], Gaussian(1.0)) == pytest.approx(0.37)

    def test_rejects_constrained_model(self):
        with pytest.raises(ValueError):
            ml_unconstrained([1.0], Exponential(10.0))

    def test_location_shift(self):
        rng = np.random.default_rng(0)
        z = rng.normal(1.0, 0.2, 40)
        base = ml_unconstrained(z, Gaussian(0.2))
        for c in (-3.0, 0.25, 10.0):
            assert ml_unconstrained(z + c, Gaussian(0.2)) == pytest.approx(base + c, rel=1e-12)


class TestConstrained:
    def test_exponential_first_order_statistic(self):
        model = Exponential(10.0)
        z = np.array([2.3, 1.1, 1.7])
        est = ml_constrained(z, model)
        assert est == 1.1
        oracle = grid_ml_location(z, model, 0.0, 1.1, 1e-5)
        assert abs(est - oracle) <= 1e-5

    def test_single_sample(self):
        assert ml_constrained([0.8], Exponential(3.0)) == 0.8

    def test_permutation_invariance(self):
        model = Exponential(2.0)
        z = np.array([2.3, 1.1, 1.7, 5.0])
        rng = np.random.default_rng(1)
        for _ in range(5):
            assert ml_constrained(rng.permutation(z), model) == ml_constrained(z, model)

    def test_rejects_unconstrained_model(self):
        with pytest.raises(ValueError):
            ml_constrained([1.0], Gaussian(1.0))

    def test_empty_series(self):
        with pytest.raises(ValueError):
            ml_constrained([], Exponential(1.0))


class TestTheta:
    def test_gaussian_example(self):
        model = Gaussian(0.1)
        est = ml_theta([1.0, 2.0, 3.0], [0.0, 1.0, 2.0], model, model)
        assert est.theta_hat == pytest.approx(0.5, abs=1e-12)
        oracle = grid_ml_theta(
            np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 2.0]), model, model, -1.0, 4.0, 2e-3
        )
        assert abs(est.theta_hat - oracle) <= 2e-3

    def test_exponential_example(self):
        model = Exponential(10.0)
        est = ml_theta([2.3, 1.1, 1.7], [0.9, 1.4, 1.2], model, model)
        assert est.theta_hat == pytest.approx(0.1, abs=1e-15)
        assert est.clamped_u and est.clamped_v
        oracle = grid_ml_theta(
            np.array([2.3, 1.1, 1.7]), np.array([0.9, 1.4, 1.2]), model, model, 0.0, 1.2, 1e-3
        )
        assert abs(est.theta_hat - oracle) <= 1e-3

    def test_symmetric_series_gives_zero(self):
        z = [1.0, 1.5, 2.0]
        for model in (Gaussian(0.2), LogNormal(0.2), Exponential(4.0)):
            est = ml_theta(z, z, model, model)
            assert est.theta_hat == 0.0

    def test_estimate_identities(self):
        model = Gaussian(0.3)
        est = ml_theta([1.0, 1.4], [0.7, 0.9], model, model)
        assert est.theta_hat == (est.xi_hat - est.psi_hat) / 2.0
        assert est.d_hat == (est.xi_hat + est.psi_hat) / 2.0
        assert not est.clamped_u and not est.clamped_v

    def test_constrained_estimates_respect_support(self):
        model = Exponential(2.0)
        rng = np.random.default_rng(2)
        u = model.sample(rng, np.full(10, 1.3))
        v = model.sample(rng, np.full(10, 0.7))
        est = ml_theta(u, v, model, model)
        assert est.xi_hat <= u.min()
        assert est.psi_hat <= v.min()


class TestConcavityCertificate:
    def test_unconstrained_maximizer_dominates_grid(self):
        rng = np.random.default_rng(3)
        for model in (Gaussian(0.3), LogNormal(0.4)):
            z = model.sample(rng, np.full(15, 0.9))
            est = ml_unconstrained(z, model)
            best = likelihood_exponent(z, model, est)
            for g in np.linspace(est - 2.0, est + 2.0, 501):
                assert best >= likelihood_exponent(z, model, g)

    def test_constrained_maximizer_dominates_feasible_grid(self):
        model = Exponential(3.0)
        rng = np.random.default_rng(4)
        z = model.sample(rng, np.full(15, 0.9))
        est = ml_constrained(z, model)
        best = likelihood_exponent(z, model, est)
        for g in np.linspace(z.min() - 2.0, z.min(), 501):
            assert best >= likelihood_exponent(z, model, g)


class TestSamplingProperties:
    def test_gaussian_theta_unbiased(self):
        # 1e4 simulated trials; mean estimate within 3 standard errors of truth.
        model = Gaussian(0.1)
        trials, n, theta0 = 10_000, 25, 0.2
        rng = np.random.default_rng(5)
        u = model.sample(rng, np.full((trials, n), 1.2))
        v = model.sample(rng, np.full((trials, n), 0.8))
        theta_hat = (u.mean(axis=1) - v.mean(axis=1)) / 2.0
        stderr = theta_hat.std(ddof=1) / math.sqrt(trials)
        assert abs(theta_hat.mean() - theta0) <= 3 * stderr

    def test_exponential_location_bias(self):
        # The sample-minimum estimator overshoots by 1/(rate*N) on average.
        rate, trials, n, xi = 10.0, 10_000, 25, 1.2
        rng = np.random.default_rng(6)
        u = xi + rng.exponential(1.0 / rate, size=(trials, n))
        xi_hat = u.min(axis=1)
        bias = xi_hat - xi
        stderr = bias.std(ddof=1) / math.sqrt(trials)
        assert abs(bias.mean() - 1.0 / (rate * n)) <= 3 * stderr
