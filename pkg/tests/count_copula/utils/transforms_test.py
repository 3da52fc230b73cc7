import unittest

import numpy as np

from count_copula.core.latent_gaussian import LatentModel
from count_copula.utils.transforms import (
    HALF_UNIT,
    POSITIVE,
    REAL,
    UNIT,
    constrain_ar,
    constrain_ma,
    to_constrained,
    to_unconstrained,
    unconstrain_ar,
    unconstrain_ma,
)


class TestTransforms(unittest.TestCase):

    def test_ranges(self):
        x = np.linspace(-30.0, 30.0, 61)
        self.assertTrue(np.all(to_constrained(x, POSITIVE) > 0))
        unit = to_constrained(x, UNIT)
        self.assertTrue(np.all((unit >= 0) & (unit <= 1)))
        half = to_constrained(x, HALF_UNIT)
        self.assertTrue(np.all((half >= 0) & (half <= 0.5)))
        np.testing.assert_array_equal(to_constrained(x, REAL), x)

    def test_inverse(self):
        for value, kind in [(2.5, POSITIVE), (0.3, UNIT), (0.2, HALF_UNIT), (-1.5, REAL)]:
            with self.subTest(kind=kind):
                self.assertAlmostEqual(to_constrained(to_unconstrained(value, kind), kind), value, places=12)

    def test_invalid_kind(self):
        with self.assertRaises(ValueError):
            to_constrained(1.0, "simplex")
        with self.assertRaises(ValueError):
            to_unconstrained(1.0, "simplex")

    def test_every_point_is_causal_and_invertible(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(size=3)
            # LatentModel rejects non-causal or non-invertible coefficients
            LatentModel(ar=tuple(constrain_ar(x)), ma=tuple(constrain_ma(x)))

    def test_ar_ma_inverse(self):
        np.testing.assert_allclose(constrain_ar(unconstrain_ar([0.5, -0.3])), [0.5, -0.3], atol=1e-10)
        np.testing.assert_allclose(constrain_ma(unconstrain_ma([0.4, 0.2])), [0.4, 0.2], atol=1e-10)

    def test_empty_blocks(self):
        self.assertEqual(constrain_ar([]).size, 0)
        self.assertEqual(unconstrain_ma([]).size, 0)


if __name__ == '__main__':
    unittest.main()
