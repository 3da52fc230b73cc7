import math
import os
import unittest

import numpy as np
from statsmodels.tsa.arima_process import arma_generate_sample

from count_copula.core.diagnostics import (
    conditional_latent_means,
    latent_residuals,
    pit_from_predictive,
    pit_histogram,
    residual_summaries,
)
from count_copula.core.errors import DataError
from count_copula.core.latent_gaussian import LatentModel
from count_copula.core.sampler import simulate_counts
from count_copula.marginals.base_marginal import get_marginal

SLOW = os.environ.get("COUNT_COPULA_SLOW_TESTS") == "1"


class TestPit(unittest.TestCase):

    def test_balanced_bernoulli_is_uniform(self):
        marginal = get_marginal("binomial", [1, 0.5])
        histogram, _ = pit_histogram([0, 1, 0, 1], marginal, LatentModel(), particles=20, seed=0)
        np.testing.assert_allclose(histogram.heights, np.full(10, 0.1), atol=1e-12)

    def test_all_zeros(self):
        marginal = get_marginal("binomial", [1, 0.5])
        histogram, _ = pit_histogram([0, 0, 0], marginal, LatentModel(), bins=10, particles=20, seed=0)
        np.testing.assert_allclose(histogram.heights, [0.2] * 5 + [0.0] * 5, atol=1e-12)

    def test_single_bin(self):
        histogram = pit_from_predictive([0.3, 0.9], [0.1, 0.4], bins=1)
        np.testing.assert_allclose(histogram.heights, [1.0])

    def test_curve_properties(self):
        rng = np.random.default_rng(0)
        lower = rng.uniform(0.0, 0.6, size=200)
        upper = lower + rng.uniform(0.0, 0.4, size=200)
        histogram = pit_from_predictive(upper, lower, bins=7)
        curve = histogram.mean_pit_curve
        self.assertEqual(curve[0], 0.0)
        self.assertEqual(curve[-1], 1.0)
        self.assertTrue(np.all(np.diff(curve) >= 0.0))
        self.assertAlmostEqual(histogram.heights.sum(), 1.0, delta=1e-10)
        self.assertEqual(len(histogram.frame()), 7)

    def test_well_specified_is_flat(self):
        rng = np.random.default_rng(1)
        marginal = get_marginal("poisson", [3.0])
        model = LatentModel(ar=(0.5,))
        data = simulate_counts(marginal, model, 2000, rng)
        histogram, ps = pit_histogram(data, marginal, model, particles=200, seed=2)
        self.assertTrue(np.all(np.abs(histogram.heights - 0.1) < 0.03))
        self.assertAlmostEqual(ps.trace.p_upper[0], marginal.cdf(data[0]), places=10)

    def test_overdispersion_is_u_shaped(self):
        rng = np.random.default_rng(3)
        data = simulate_counts(get_marginal("negbinomial", [1.0, 0.75]), LatentModel(), 1000, rng)
        histogram, _ = pit_histogram(data, get_marginal("poisson", [data.mean()]), LatentModel(), particles=10, seed=0)
        middle = histogram.heights[3:7].mean()
        self.assertGreater(histogram.heights[0], middle)
        self.assertGreater(histogram.heights[-1], middle)

    def test_uniform_percentile_bands(self):
        rng = np.random.default_rng(104)
        heights = []
        for _ in range(500):
            u = rng.random(104)
            heights.append(pit_from_predictive(u, u, bins=10).heights)
        low, high = np.percentile(np.array(heights), [5, 95], axis=0)
        self.assertTrue(np.all((low > 0.048 - 0.01) & (low < 0.058 + 0.01)), msg=low)
        self.assertTrue(np.all((high > 0.145 - 0.01) & (high < 0.154 + 0.01)), msg=high)

    @unittest.skipUnless(SLOW, "set COUNT_COPULA_SLOW_TESTS=1 to run")
    def test_long_series_is_calibrated(self):
        marginal = get_marginal("poisson", [2.0])
        model = LatentModel(ar=(0.75,))
        data = simulate_counts(marginal, model, 9999, np.random.default_rng(5))
        histogram, _ = pit_histogram(data, marginal, model, particles=500, seed=6)
        self.assertTrue(np.all((histogram.heights >= 0.08) & (histogram.heights <= 0.12)), msg=histogram.heights)

    @unittest.skipUnless(SLOW, "set COUNT_COPULA_SLOW_TESTS=1 to run")
    def test_deviation_shrinks_with_length(self):
        marginal = get_marginal("poisson", [2.0])
        model = LatentModel(ar=(0.75,))
        medians = []
        for length in (100, 1000, 10_000):
            deviations = []
            for seed in range(20):
                data = simulate_counts(marginal, model, length - 1, np.random.default_rng(seed))
                histogram, _ = pit_histogram(data, marginal, model, particles=200, seed=seed)
                deviations.append(np.max(np.abs(histogram.heights - 0.1)))
            medians.append(np.median(deviations))
        self.assertTrue(np.all(np.diff(medians) < 0), msg=medians)


class TestLatentResiduals(unittest.TestCase):

    def test_bernoulli_half_normal_mean(self):
        marginal = get_marginal("binomial", [1, 0.5])
        zhat = conditional_latent_means([1, 0], marginal)
        self.assertAlmostEqual(zhat[0], math.sqrt(2.0 / math.pi), places=12)
        self.assertAlmostEqual(zhat[1], -math.sqrt(2.0 / math.pi), places=12)

    def test_matches_constrained_draws(self):
        marginal = get_marginal("poisson", [2.0])
        z = np.random.default_rng(4).standard_normal(1_000_000)
        x = marginal.latent_quantile(z)
        zhat = conditional_latent_means([0, 1, 2, 3], marginal)
        for k in range(4):
            draws = z[x == k]
            self.assertAlmostEqual(zhat[k], draws.mean(), delta=3.0 * draws.std() / math.sqrt(len(draws)))

    def test_white_noise_depends_on_counts_only(self):
        marginal = get_marginal("poisson", [2.0])
        result = latent_residuals([3, 1, 3, 0, 2, 3], marginal, LatentModel())
        residuals = result.residuals
        self.assertEqual(residuals[0], residuals[2])
        self.assertEqual(residuals[0], residuals[5])
        np.testing.assert_allclose(result.standardized, residuals)
        self.assertAlmostEqual(result.conditional_means.mean() + residuals[1], result.conditional_means[1], places=12)

    def test_whitening_removes_dependence(self):
        rng = np.random.default_rng(5)
        marginal = get_marginal("poisson", [5.0])
        model = LatentModel(ar=(0.8,))
        data = simulate_counts(marginal, model, 999, rng)
        raw = residual_summaries(latent_residuals(data, marginal, LatentModel()).residuals)
        whitened = residual_summaries(latent_residuals(data, marginal, model).residuals)
        self.assertGreater(abs(raw.acf[0]), raw.band)
        self.assertLess(abs(whitened.acf[0]), 0.15)
        self.assertEqual(len(latent_residuals(data, marginal, model).frame()), 1000)


class TestResidualSummaries(unittest.TestCase):

    def test_white_noise(self):
        summary = residual_summaries(np.random.default_rng(6).standard_normal(500))
        self.assertEqual(summary.max_lag, 20)
        self.assertLessEqual(summary.to_dict()["acf_outside"], 5)
        self.assertGreater(summary.shapiro_pvalue, 0.001)
        self.assertAlmostEqual(summary.band, 1.96 / math.sqrt(500), places=14)

    def test_ar1_detected(self):
        np.random.seed(7)
        sample = arma_generate_sample([1.0, -0.75], [1.0], 400)
        summary = residual_summaries(sample)
        self.assertGreater(abs(summary.acf[0]), summary.band)
        self.assertTrue(summary.frame()["acf_outside"].iloc[0])

    def test_pacf_cutoff(self):
        np.random.seed(8)
        sample = arma_generate_sample([1.0, -0.5, -0.3], [1.0], 2000)
        summary = residual_summaries(sample)
        self.assertGreater(abs(summary.pacf[1]), summary.band)
        self.assertLess(np.mean(np.abs(summary.pacf[2:])), 2 * summary.band)

    def test_short_series(self):
        with self.assertRaises(DataError):
            residual_summaries(np.zeros(19))
        self.assertEqual(residual_summaries(np.random.default_rng(9).standard_normal(30)).max_lag, 14)


if __name__ == '__main__':
    unittest.main()
