import unittest

import numpy as np

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import get_marginal
from count_copula.marginals.binomial_marginal import BinomialMarginal


class TestBinomialMarginal(unittest.TestCase):

    def test_bernoulli(self):
        marginal = get_marginal("binomial", [1.0, 0.5])
        self.assertEqual(marginal.cdf(0), 0.5)
        self.assertEqual(marginal.cdf(1), 1.0)
        self.assertEqual(marginal.cum_table().cutoff, 1)
        self.assertEqual(marginal.moments(), (0.5, 0.25))

    def test_support(self):
        marginal = get_marginal("binomial", [4.0, 0.3])
        self.assertEqual(marginal.pmf(5), 0.0)
        self.assertAlmostEqual(float(np.sum(marginal.pmf(np.arange(5)))), 1.0, places=14)

    def test_glm_parameters(self):
        self.assertEqual(get_marginal("binomial", [8.0, 0.25]).glm_parameters(), (2.0, 8.0))

    def test_invalid(self):
        with self.assertRaises(ParameterDomainError):
            get_marginal("binomial", [2.5, 0.3])
        with self.assertRaises(ParameterDomainError):
            get_marginal("binomial", [3.0, 0.0])

    def test_initial_guess(self):
        self.assertEqual(BinomialMarginal.initial_guess([1, 2, 3], fixed={"n": 4}), {"n": 4.0, "p": 0.5})


if __name__ == '__main__':
    unittest.main()
