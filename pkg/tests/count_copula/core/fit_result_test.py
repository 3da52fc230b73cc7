import json
import math
import unittest

from count_copula.core.errors import ConfigError
from count_copula.core.fit_result import FitResult, information_criteria, model_label
from count_copula.core.latent_gaussian import LatentModel


def make_fit(**kwargs):
    values = dict(
        method="pf",
        family="negbinomial",
        estimates={"r": 3.0, "p": 0.2, "ar_1": 0.5},
        ar_order=1,
        n_obs=104,
        loglik=-370.0,
        std_errors={"r": 0.4, "p": 0.03, "ar_1": 0.08},
        seed=11,
        particles=500,
        filter_name="sisr",
    )
    values.update(kwargs)
    return FitResult(**values)


class TestInformationCriteria(unittest.TestCase):

    def test_formula(self):
        aic, aicc, bic = information_criteria(-370.0, 4, 104)
        self.assertAlmostEqual(aic, 748.0, places=12)
        self.assertAlmostEqual(bic, 748.0 + 4.0 * math.log(104) - 8.0, places=12)
        self.assertAlmostEqual(aicc, 748.0 + 40.0 / 99.0, places=12)

    def test_nested_difference(self):
        _, _, small = information_criteria(-400.0, 2, 150)
        _, _, large = information_criteria(-390.0, 5, 150)
        self.assertAlmostEqual(large - small, -2.0 * 10.0 + 3.0 * math.log(150), places=10)

    def test_too_many_parameters(self):
        _, aicc, _ = information_criteria(-10.0, 5, 6)
        self.assertEqual(aicc, math.inf)


class TestFitResult(unittest.TestCase):

    def test_criteria_filled_in(self):
        fit = make_fit()
        self.assertEqual(fit.n_params, 3)
        self.assertAlmostEqual(fit.aic, 746.0, places=12)
        self.assertEqual(fit.model, "AR(1)")

    def test_json_round_trip(self):
        fit = make_fit(flags=["acf_clamped"])
        restored = FitResult.from_dict(json.loads(json.dumps(fit.to_dict())))
        self.assertEqual(restored.to_dict(), fit.to_dict())

    def test_assemble(self):
        marginal, model = make_fit().assemble()
        self.assertEqual(marginal.family, "negbinomial")
        self.assertAlmostEqual(marginal.p, 0.2, places=14)
        self.assertEqual(model, LatentModel(ar=(0.5,)))

    def test_covariates_required(self):
        fit = make_fit(estimates={"beta_0": 0.1, "beta_1": 0.2, "k": 0.3}, ar_order=0, covariate_columns=["trend"])
        with self.assertRaises(ConfigError):
            fit.assemble()

    def test_invalid_payloads(self):
        with self.assertRaises(ConfigError):
            FitResult.from_dict({"method": "gl", "family": "poisson", "estimates": {}, "colour": 1})
        with self.assertRaises(ConfigError):
            FitResult.from_dict({"method": "gl", "family": "poisson"})
        with self.assertRaises(ConfigError):
            make_fit(method="mom")

    def test_labels(self):
        self.assertEqual(model_label(0, 0), "WN")
        self.assertEqual(model_label(0, 2), "MA(2)")
        self.assertEqual(model_label(3, 1), "ARMA(3,1)")


if __name__ == '__main__':
    unittest.main()
