import math

from count_copula.core.errors import ConfigError
from count_copula.utils.log_handler import LOG_LEVELS
from count_copula.utils.utils import read_json

SIMULATE = "simulate"
FIT = "fit"
DIAGNOSE = "diagnose"
REPLICATE = "replicate"

# keys accepted in the JSON file, with built-in defaults
DEFAULTS = {
    "family": "poisson",
    "params": None,
    "fixed": {},
    "components": 2,
    "beta": None,
    "static_params": {},
    "linked_param": "mean",
    "covariates_file": None,
    "covariate_columns": [],
    "ar": [],
    "ma": [],
    "length": 400,
    "seed": 0,
    "particles": 1000,
    "filter": "sisr",
    "ess_threshold": 0.5,
    "link_order": 25,
    "mc_paths": 10 ** 6,
    "pseudo": True,
    "estimators": ["gl", "iyw", "pf"],
    "orders": [[0, 0], [1, 0], [0, 1]],
    "optimizer_mode": "crn",
    "restarts": 3,
    "global_generations": 200,
    "std_errors": True,
    "input": None,
    "column": None,
    "fit_file": None,
    "bins": 10,
    "replications": 200,
    "lengths": [100, 200, 400],
    "repeated_fits": 0,
    "repeat_particles": [5, 10, 100, 500],
    "filter_trace": False,
    "export_link": False,
    "debug_latent": False,
    "out_dir": "output",
    "threads": 1,
}


def get_commands():
    return [SIMULATE, FIT, DIAGNOSE, REPLICATE]


class GeneralConfig:
    def __init__(self, args):
        # General arguments
        self.command = getattr(args, 'command', None)
        self.config = getattr(args, 'config', None)
        self.log = getattr(args, 'log', None)
        self.log_file = None

        # Model arguments
        self.family = getattr(args, 'family', None)
        self.params = getattr(args, 'params', None)
        self.fixed = getattr(args, 'fixed', None)
        self.components = getattr(args, 'components', None)
        self.beta = getattr(args, 'beta', None)
        self.static_params = getattr(args, 'static_params', None)
        self.linked_param = getattr(args, 'linked_param', None)
        self.covariates_file = getattr(args, 'covariates_file', None)
        self.covariate_columns = getattr(args, 'covariate_columns', None)
        self.ar = getattr(args, 'ar', None)
        self.ma = getattr(args, 'ma', None)
        self.length = getattr(args, 'length', None)
        self.seed = getattr(args, 'seed', None)

        # Particle filter arguments
        self.particles = getattr(args, 'particles', None)
        self.filter = getattr(args, 'filter', None)
        self.ess_threshold = getattr(args, 'ess_threshold', None)

        # Link arguments
        self.link_order = getattr(args, 'link_order', None)
        self.mc_paths = getattr(args, 'mc_paths', None)
        self.pseudo = getattr(args, 'pseudo', None)

        # Estimation arguments
        self.estimators = getattr(args, 'estimators', None)
        self.orders = getattr(args, 'orders', None)
        self.optimizer_mode = getattr(args, 'optimizer_mode', None)
        self.restarts = getattr(args, 'restarts', None)
        self.global_generations = getattr(args, 'global_generations', None)
        self.std_errors = getattr(args, 'std_errors', None)

        # Input and diagnostics arguments
        self.input = getattr(args, 'input', None)
        self.column = getattr(args, 'column', None)
        self.fit_file = getattr(args, 'fit_file', None)
        self.bins = getattr(args, 'bins', None)

        # Replication study arguments
        self.replications = getattr(args, 'replications', None)
        self.lengths = getattr(args, 'lengths', None)
        self.repeated_fits = getattr(args, 'repeated_fits', None)
        self.repeat_particles = getattr(args, 'repeat_particles', None)

        # Output arguments
        self.filter_trace = getattr(args, 'filter_trace', None)
        self.export_link = getattr(args, 'export_link', None)
        self.debug_latent = getattr(args, 'debug_latent', None)
        self.out_dir = getattr(args, 'out_dir', None)
        self.threads = getattr(args, 'threads', None)

    def __str__(self):
        return ",\n".join(f"{key}={value}" for key, value in self.__dict__.items())

    def resolve(self):
        """Fill unset values from the JSON file named by ``config``, then from the defaults."""
        overlay = {}
        if self.config:
            overlay = read_json(self.config)
            if not isinstance(overlay, dict):
                raise ConfigError(f"{self.config}: top level must be a JSON object")
            unknown = sorted(key for key in overlay if key not in DEFAULTS)
            if unknown:
                raise ConfigError(f"{self.config}: unknown keys {unknown}")
        for key, default in DEFAULTS.items():
            if getattr(self, key) is None:
                value = overlay.get(key, default)
                setattr(self, key, list(value) if isinstance(value, list) else dict(value) if isinstance(value, dict) else value)
        if self.log is None:
            self.log = "INFO"
        return self

    def validate(self, command=None):
        command = command or self.command
        if command not in get_commands():
            raise ConfigError(f"command: must be one of {get_commands()}, got {command!r}")
        if self.log not in LOG_LEVELS:
            raise ConfigError(f"log: must be one of {LOG_LEVELS}, got {self.log!r}")

        from count_copula.estimators.base_estimator import get_supported_estimators
        from count_copula.estimators.pf_estimator import get_optimizer_modes
        from count_copula.marginals.base_marginal import get_supported_marginals
        from count_copula.particle_filters.base_particle_filter import get_supported_filters

        _choice("family", self.family, get_supported_marginals())
        _choice("filter", self.filter, get_supported_filters())
        _choice("optimizer_mode", self.optimizer_mode, get_optimizer_modes())
        for key in ("particles", "link_order", "mc_paths", "bins", "threads", "components", "replications"):
            _integer(key, getattr(self, key), minimum=1)
        for key in ("seed", "length", "restarts", "global_generations", "repeated_fits"):
            _integer(key, getattr(self, key), minimum=0)
        _number("ess_threshold", self.ess_threshold, lower=0.0, upper=1.0)
        for key in ("pseudo", "filter_trace", "export_link", "debug_latent", "std_errors"):
            if not isinstance(getattr(self, key), bool):
                raise ConfigError(f"{key}: must be true or false, got {getattr(self, key)!r}")
        _number_list("ar", self.ar)
        _number_list("ma", self.ma)
        _number_map("fixed", self.fixed)
        _number_map("static_params", self.static_params)
        _string_list("covariate_columns", self.covariate_columns)
        _string_list("estimators", self.estimators)
        for i, name in enumerate(self.estimators):
            _choice(f"estimators[{i}]", name, get_supported_estimators())
        _orders(self.orders)
        if not isinstance(self.lengths, list) or not self.lengths:
            raise ConfigError(f"lengths: must be a non-empty list, got {self.lengths!r}")
        for i, value in enumerate(self.lengths):
            _integer(f"lengths[{i}]", value, minimum=2)
        if not isinstance(self.repeat_particles, list):
            raise ConfigError(f"repeat_particles: must be a list, got {self.repeat_particles!r}")
        for i, value in enumerate(self.repeat_particles):
            _integer(f"repeat_particles[{i}]", value, minimum=1)

        if self.covariates_file and not self.covariate_columns:
            raise ConfigError("covariate_columns: required when covariates_file is given")
        if command in (SIMULATE, REPLICATE):
            if self.covariates_file and command == SIMULATE:
                if self.beta is None:
                    raise ConfigError("beta: required when simulating with covariates")
                _number_list("beta", self.beta)
                if len(self.beta) != len(self.covariate_columns) + 1:
                    raise ConfigError(
                        f"beta: {len(self.beta)} coefficients given for {len(self.covariate_columns)} covariate columns"
                    )
            else:
                if self.params is None:
                    raise ConfigError("params: required for simulation")
                _number_map("params", self.params)
        if command == REPLICATE and self.covariates_file:
            raise ConfigError("covariates_file: replication studies use a stationary marginal")
        if command in (FIT, DIAGNOSE) and not self.input:
            raise ConfigError("input: a counts CSV file is required")
        if command == FIT and not self.estimators:
            raise ConfigError("estimators: at least one estimator is needed to fit")
        if command == DIAGNOSE and not self.fit_file:
            raise ConfigError("fit_file: a fits JSON file is required")
        return self


def _choice(path, value, choices):
    if value not in choices:
        raise ConfigError(f"{path}: must be one of {choices}, got {value!r}")


def _integer(path, value, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{path}: must be at least {minimum}, got {value}")


def _number(path, value, lower=-math.inf, upper=math.inf):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path}: must be a finite number, got {value!r}")
    if not lower <= value <= upper:
        raise ConfigError(f"{path}: must lie in [{lower}, {upper}], got {value}")


def _number_list(path, values):
    if not isinstance(values, list):
        raise ConfigError(f"{path}: must be a list of numbers, got {values!r}")
    for i, value in enumerate(values):
        _number(f"{path}[{i}]", value)


def _number_map(path, values):
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: must be an object of name: number pairs, got {values!r}")
    for name, value in values.items():
        _number(f"{path}.{name}", value)


def _string_list(path, values):
    if not isinstance(values, list) or not all(isinstance(value, str) for value in values):
        raise ConfigError(f"{path}: must be a list of strings, got {values!r}")


def _orders(orders):
    if not isinstance(orders, list) or not orders:
        raise ConfigError(f"orders: must be a non-empty list of [p, q] pairs, got {orders!r}")
    for i, order in enumerate(orders):
        if not isinstance(order, list) or len(order) != 2:
            raise ConfigError(f"orders[{i}]: must be a [p, q] pair, got {order!r}")
        for j, value in enumerate(order):
            _integer(f"orders[{i}][{j}]", value, minimum=0)
