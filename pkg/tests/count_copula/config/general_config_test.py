import json
import tempfile
import unittest
from pathlib import Path

from count_copula.config.general_config import DEFAULTS, get_commands
from count_copula.core.errors import ConfigError, DataError
from tests.test_utils import get_config


class TestGeneralConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_json(self, payload):
        path = self.dir / "config.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)

    def test_defaults(self):
        config = get_config('simulate', params={'lam': 1.0}).resolve()
        self.assertEqual(config.family, 'poisson')
        self.assertEqual(config.particles, 1000)
        self.assertEqual(config.orders, [[0, 0], [1, 0], [0, 1]])
        self.assertEqual(config.link_order, 25)
        config.validate()

    def test_defaults_are_copied(self):
        config = get_config('fit', input='x.csv').resolve()
        config.estimators.append('gl')
        self.assertEqual(DEFAULTS['estimators'], ['gl', 'iyw', 'pf'])

    def test_precedence(self):
        path = self.write_json({'seed': 5, 'particles': 300, 'family': 'negbinomial'})
        config = get_config('fit', config=path, input='x.csv', seed=9).resolve()
        # cli > json > default
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.particles, 300)
        self.assertEqual(config.family, 'negbinomial')
        self.assertEqual(config.bins, 10)

    def test_unknown_json_key(self):
        path = self.write_json({'sead': 5})
        with self.assertRaisesRegex(ConfigError, 'sead'):
            get_config('fit', config=path).resolve()

    def test_json_must_be_object(self):
        path = self.write_json([1, 2])
        with self.assertRaises(ConfigError):
            get_config('fit', config=path).resolve()

    def test_missing_json_file(self):
        with self.assertRaises(DataError):
            get_config('fit', config=str(self.dir / 'missing.json')).resolve()

    def test_invalid_json(self):
        path = self.dir / 'broken.json'
        path.write_text('{"seed": }', encoding='utf-8')
        with self.assertRaisesRegex(DataError, 'broken.json:1'):
            get_config('fit', config=str(path)).resolve()

    def test_error_paths(self):
        cases = [
            ({'ar': [0.5, 'x']}, r'ar\[1\]'),
            ({'params': {'lam': 'two'}}, r'params\.lam'),
            ({'orders': [[0, 0], [1, 0], [1]]}, r'orders\[2\]'),
            ({'orders': [[0, -1]]}, r'orders\[0\]\[1\]'),
            ({'estimators': ['gl', 'mom']}, r'estimators\[1\]'),
            ({'lengths': [100, 1]}, r'lengths\[1\]'),
            ({'particles': 0}, 'particles'),
            ({'ess_threshold': 1.5}, 'ess_threshold'),
            ({'filter': 'bootstrap'}, 'filter'),
            ({'family': 'zeta'}, 'family'),
            ({'seed': 1.5}, 'seed'),
            ({'debug_latent': 'yes'}, 'debug_latent'),
        ]
        for overrides, pattern in cases:
            values = {'params': {'lam': 1.0}}
            values.update(overrides)
            config = get_config('simulate', **values).resolve()
            with self.subTest(overrides=overrides):
                with self.assertRaisesRegex(ConfigError, pattern):
                    config.validate()

    def test_command_requirements(self):
        with self.assertRaisesRegex(ConfigError, 'params'):
            get_config('simulate').resolve().validate()
        with self.assertRaisesRegex(ConfigError, 'input'):
            get_config('fit').resolve().validate()
        with self.assertRaisesRegex(ConfigError, 'estimators'):
            get_config('fit', input='x.csv', estimators=[]).resolve().validate()
        with self.assertRaisesRegex(ConfigError, 'fit_file'):
            get_config('diagnose', input='x.csv').resolve().validate()
        with self.assertRaisesRegex(ConfigError, 'command'):
            get_config('estimate').resolve().validate()

    def test_regression_simulation(self):
        config = get_config(
            'simulate', covariates_file='m.csv', covariate_columns=['m1', 'm2'], beta=[0.1, 0.2]
        ).resolve()
        with self.assertRaisesRegex(ConfigError, 'beta'):
            config.validate()
        config.beta = [0.1, 0.2, 0.3]
        config.validate()

    def test_covariate_columns_required(self):
        config = get_config('fit', input='x.csv', covariates_file='m.csv').resolve()
        with self.assertRaisesRegex(ConfigError, 'covariate_columns'):
            config.validate()

    def test_str(self):
        config = get_config('fit', input='x.csv').resolve()
        self.assertIn('input=x.csv', str(config))
        self.assertIn('family=poisson', str(config))

    def test_commands(self):
        self.assertEqual(get_commands(), ['simulate', 'fit', 'diagnose', 'replicate'])


if __name__ == '__main__':
    unittest.main()
