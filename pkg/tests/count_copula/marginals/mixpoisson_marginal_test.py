import unittest

import numpy as np

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import get_marginal
from count_copula.marginals.mixpoisson_marginal import MixPoissonMarginal


class TestMixPoissonMarginal(unittest.TestCase):

    def test_single_component(self):
        marginal = get_marginal("mixpoisson", {"lam_1": 2.0})
        self.assertAlmostEqual(marginal.pmf(3), 0.180447, places=6)
        self.assertEqual(marginal.param_names, ["lam_1"])

    def test_moments(self):
        marginal = get_marginal("mixpoisson", [2.0, 10.0, 0.25])
        self.assertEqual(marginal.moments(), (8.0, 20.0))
        table_mean, table_variance = marginal.table_moments()
        self.assertAlmostEqual(table_mean, 8.0, places=10)
        self.assertAlmostEqual(table_variance, 20.0, places=9)

    def test_dict_params(self):
        marginal = get_marginal("mixpoisson", {"lam_1": 2.0, "lam_2": 10.0, "p_1": 0.25})
        self.assertEqual(marginal.params, (2.0, 10.0, 0.25))
        np.testing.assert_allclose(marginal.weights, [0.25, 0.75])

    def test_weight_above_half_allowed_at_construction(self):
        self.assertAlmostEqual(get_marginal("mixpoisson", [2.0, 10.0, 0.75]).moments()[0], 4.0)

    def test_invalid(self):
        with self.assertRaises(ParameterDomainError):
            get_marginal("mixpoisson", [2.0, 10.0])
        with self.assertRaises(ParameterDomainError):
            get_marginal("mixpoisson", [2.0, 10.0, 1.0])
        with self.assertRaises(ParameterDomainError):
            get_marginal("mixpoisson", [2.0, -1.0, 0.3])

    def test_initial_guess(self):
        rng = np.random.default_rng(5)
        labels = rng.random(4000) < 0.25
        data = np.where(labels, rng.poisson(2.0, 4000), rng.poisson(10.0, 4000))
        guess = MixPoissonMarginal.initial_guess(data, components=2)
        self.assertLess(guess["p_1"], 0.5)
        self.assertNotAlmostEqual(guess["lam_1"], guess["lam_2"], places=1)


if __name__ == '__main__':
    unittest.main()
