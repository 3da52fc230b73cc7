import math
import unittest
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import norm

from count_copula.core.errors import ConfigError, HeavyTailError, ParameterDomainError
from count_copula.marginals.base_marginal import (
    get_marginal,
    get_supported_marginals,
    param_layout,
    reparametrize,
)
from count_copula.marginals.poisson_marginal import PoissonMarginal
from count_copula.utils.transforms import FIXED, HALF_UNIT, POSITIVE, UNIT


class TestFactory(unittest.TestCase):

    def test_supported_names(self):
        self.assertEqual(
            get_supported_marginals(),
            ["poisson", "negbinomial", "genpoisson", "mixpoisson", "binomial", "cmp"],
        )

    def test_unknown_family(self):
        with self.assertRaises(ConfigError):
            get_marginal("zipoisson", [1.0])

    def test_instances_are_shared(self):
        self.assertIs(get_marginal("poisson", [2.0]), get_marginal("poisson", {"lam": 2.0}))

    def test_dict_params_validation(self):
        with self.assertRaises(ConfigError):
            get_marginal("negbinomial", {"r": 3.0})
        with self.assertRaises(ConfigError):
            get_marginal("poisson", {"lam": 1.0, "mu": 2.0})

    def test_param_layout(self):
        self.assertEqual(param_layout("negbinomial"), (["r", "p"], [POSITIVE, UNIT]))
        self.assertEqual(param_layout("binomial", fixed={"n": 4}), (["n", "p"], [FIXED, UNIT]))
        names, kinds = param_layout("mixpoisson", components=2)
        self.assertEqual(names, ["lam_1", "lam_2", "p_1"])
        self.assertEqual(kinds, [POSITIVE, POSITIVE, HALF_UNIT])
        with self.assertRaises(ConfigError):
            param_layout("binomial")


class TestCumTable(unittest.TestCase):

    def test_poisson_cutoffs(self):
        for lam, expected in ((0.1, 10), (1.0, 19), (10.0, 47)):
            table = get_marginal("poisson", [lam]).cum_table()
            self.assertLessEqual(abs(table.cutoff - expected), 1, msg=f"lam={lam}: cutoff {table.cutoff}")

    def test_table_shape(self):
        table = get_marginal("poisson", [1.0]).cum_table()
        self.assertTrue(np.all(np.diff(table.cums) >= 0))
        self.assertLess(table.cums[-1], 1.0)
        self.assertEqual(get_marginal("poisson", [1.0]).cdf(table.cutoff), 1.0)
        self.assertTrue(np.all(np.isfinite(table.thresholds)))
        self.assertEqual(len(table), table.cutoff)

    def test_mass_sums_to_one(self):
        specs = [
            ("poisson", [0.5]),
            ("poisson", [20.0]),
            ("negbinomial", [3.0, 0.2]),
            ("negbinomial", [0.5, 0.9]),
            ("genpoisson", [2.0, 0.4]),
            ("mixpoisson", [2.0, 10.0, 0.25]),
            ("binomial", [10.0, 0.3]),
            ("cmp", [3.0, 0.7]),
        ]
        for family, params in specs:
            table = get_marginal(family, params).cum_table()
            total = float(np.sum(table.probs))
            self.assertAlmostEqual(total, 1.0, delta=1e-12, msg=f"{family}{params}")

    def test_grid_growth_replaces_grid(self):
        marginal = PoissonMarginal([2.0])
        small = marginal._grid_for(0)
        size = len(small.pmf)
        self.assertFalse(small.cdf.flags.writeable)
        self.assertFalse(small.thresholds.flags.writeable)
        self.assertIs(marginal._grid_for(size - 1), small)

        large = marginal._grid_for(size + 10)
        self.assertIsNot(large, small)
        self.assertEqual(len(small.pmf), size)
        self.assertGreater(len(large.pmf), size + 10)
        np.testing.assert_allclose(large.pmf[:size], small.pmf, rtol=1e-14)

    def test_shared_instance_across_threads(self):
        counts = [np.arange(k, k + 5) * 25 for k in range(16)]
        reference = PoissonMarginal([3.0])
        expected = [reference.cdf(k) for k in counts]
        shared = PoissonMarginal([3.0])
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(shared.cdf, counts))
        for got, want in zip(results, expected):
            np.testing.assert_allclose(got, want, atol=1e-15)

    def test_heavy_tail_cap(self):
        with self.assertRaises(HeavyTailError):
            PoissonMarginal([1e7], tail_cap=1000).cum_table()


class TestQuantile(unittest.TestCase):

    def test_examples(self):
        self.assertEqual(get_marginal("poisson", [1.0]).quantile(0.3), 0)
        self.assertEqual(get_marginal("binomial", [1.0, 0.5]).quantile(0.75), 1)

    def test_step_inverse(self):
        marginal = get_marginal("poisson", [2.0])
        for k in range(8):
            c = marginal.cdf(k)
            self.assertEqual(marginal.quantile(c), k)
            self.assertEqual(marginal.quantile(c + 1e-12), k + 1)

    def test_out_of_range(self):
        marginal = get_marginal("poisson", [2.0])
        for u in (0.0, 1.0, -0.1, 1.5):
            with self.assertRaises(ParameterDomainError):
                marginal.quantile(u)

    def test_latent_quantile_matches_quantile(self):
        marginal = get_marginal("negbinomial", [3.0, 0.2])
        z = np.linspace(-4, 4, 401)
        np.testing.assert_array_equal(marginal.latent_quantile(z), marginal.quantile(norm.cdf(z)))

    def test_marginal_transform(self):
        marginal = get_marginal("poisson", [2.0])
        z = np.random.default_rng(11).standard_normal(100_000)
        counts = np.bincount(marginal.latent_quantile(z), minlength=12)[:12]
        expected = marginal.pmf(np.arange(12)) * len(z)
        se = np.sqrt(len(z) * marginal.pmf(np.arange(12)) * (1 - marginal.pmf(np.arange(12))))
        self.assertTrue(np.all(np.abs(counts - expected) <= 4 * se + 1))


class TestLatentBounds(unittest.TestCase):

    def test_bernoulli(self):
        marginal = get_marginal("binomial", [1.0, 0.5])
        lower, upper = marginal.latent_bounds(0)
        self.assertEqual(lower, -np.inf)
        self.assertAlmostEqual(upper, 0.0, places=14)
        lower, upper = marginal.latent_bounds(1)
        self.assertAlmostEqual(lower, 0.0, places=14)
        self.assertEqual(upper, np.inf)

    def test_far_tail_stays_finite(self):
        marginal = get_marginal("poisson", [1.0])
        cutoff = marginal.cum_table().cutoff
        lower, upper = marginal.latent_bounds(np.array([cutoff + 2]))
        self.assertTrue(np.isfinite(lower[0]) and np.isfinite(upper[0]))
        self.assertLess(lower[0], upper[0])


class TestReparametrize(unittest.TestCase):

    def test_negbinomial(self):
        marginal = reparametrize("negbinomial", (0.75, 1.0 / 3.0))
        self.assertAlmostEqual(marginal.r, 3.0, places=12)
        self.assertAlmostEqual(marginal.p, 0.2, places=12)
        mu, k = get_marginal("negbinomial", [3.0, 0.2]).glm_parameters()
        back = reparametrize("negbinomial", (mu, k))
        self.assertAlmostEqual(back.r, 3.0, places=12)
        self.assertAlmostEqual(back.p, 0.2, places=12)

    def test_genpoisson(self):
        marginal = reparametrize("genpoisson", (2.5, 0.0))
        self.assertEqual(marginal.params, (2.5, 0.0))
        mu, alpha = reparametrize("genpoisson", (3.0, 0.2)).glm_parameters()
        self.assertAlmostEqual(mu, 3.0, places=12)
        self.assertAlmostEqual(alpha, 0.2, places=12)
        self.assertAlmostEqual(reparametrize("genpoisson", (3.0, 0.2)).moments()[1], 3.0 * 1.6 ** 2, places=10)

    def test_binomial_and_poisson(self):
        self.assertEqual(reparametrize("binomial", (2.0, 8.0)).params, (8.0, 0.25))
        self.assertEqual(reparametrize("poisson", (4.0,)).params, (4.0,))

    def test_domain(self):
        with self.assertRaises(ParameterDomainError):
            reparametrize("negbinomial", (-1.0, 0.5))
        with self.assertRaises(ParameterDomainError):
            reparametrize("genpoisson", (1.0, -0.5))
        with self.assertRaises(ConfigError):
            reparametrize("cmp", (1.0, 1.0))

    def test_str(self):
        self.assertEqual(str(get_marginal("negbinomial", [3.0, 0.2])), "negbinomial(r=3, p=0.2)")
        self.assertTrue(math.isclose(get_marginal("poisson", [1.0]).pmf(0), math.exp(-1.0)))


if __name__ == '__main__':
    unittest.main()
