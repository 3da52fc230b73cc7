from unittest.mock import MagicMock

from count_copula.config.general_config import DEFAULTS, GeneralConfig


def get_config(command, **overrides):
    """Config as the CLI would build it; unset fields stay None until resolve()."""
    fields = {name: None for name in DEFAULTS}
    fields.update(command=command, config=None, log='INFO')
    fields.update(overrides)
    return GeneralConfig(MagicMock(**fields))


def get_simulate_config(out_dir, **overrides):
    values = dict(family='poisson', params={'lam': 2.0}, ar=[0.75], length=400, seed=1, out_dir=str(out_dir))
    values.update(overrides)
    return get_config('simulate', **values).resolve()


def get_fit_config(input_file, out_dir, **overrides):
    values = dict(
        family='poisson',
        input=str(input_file),
        estimators=['gl', 'pf'],
        orders=[[0, 0], [1, 0]],
        particles=100,
        restarts=1,
        std_errors=False,
        out_dir=str(out_dir),
    )
    values.update(overrides)
    return get_config('fit', **values).resolve()


def get_diagnose_config(input_file, fit_file, out_dir, **overrides):
    values = dict(input=str(input_file), fit_file=str(fit_file), particles=200, seed=7, out_dir=str(out_dir))
    values.update(overrides)
    return get_config('diagnose', **values).resolve()


def get_replicate_config(out_dir, **overrides):
    values = dict(
        family='poisson',
        params={'lam': 2.0},
        ar=[0.5],
        estimators=['gl', 'iyw'],
        lengths=[60],
        replications=3,
        restarts=1,
        seed=11,
        out_dir=str(out_dir),
    )
    values.update(overrides)
    return get_config('replicate', **values).resolve()
