import unittest

import numpy as np
from scipy.stats import poisson

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import get_marginal


class TestGenPoissonMarginal(unittest.TestCase):

    def test_reduces_to_poisson(self):
        marginal = get_marginal("genpoisson", [2.0, 0.0])
        self.assertAlmostEqual(marginal.pmf(2), 0.270671, places=6)
        np.testing.assert_allclose(marginal.pmf(np.arange(10)), poisson.pmf(np.arange(10), 2.0), rtol=1e-12)

    def test_moments_match_table(self):
        marginal = get_marginal("genpoisson", [2.0, 0.4])
        mean, variance = marginal.moments()
        self.assertAlmostEqual(mean, 2.0 / 0.6, places=12)
        self.assertAlmostEqual(variance, 2.0 / 0.6 ** 3, places=12)
        table_mean, table_variance = marginal.table_moments()
        self.assertAlmostEqual(table_mean, mean, places=8)
        self.assertAlmostEqual(table_variance, variance, places=6)
        self.assertGreater(variance, mean)

    def test_zero_count(self):
        self.assertAlmostEqual(get_marginal("genpoisson", [1.5, 0.3]).log_pmf(0), -1.5, places=14)
        self.assertEqual(get_marginal("genpoisson", [1.5, 0.3]).log_pmf(-1), -np.inf)

    def test_invalid(self):
        with self.assertRaises(ParameterDomainError):
            get_marginal("genpoisson", [1.0, 1.0])
        with self.assertRaises(ParameterDomainError):
            get_marginal("genpoisson", [1.0, -0.1])


if __name__ == '__main__':
    unittest.main()
