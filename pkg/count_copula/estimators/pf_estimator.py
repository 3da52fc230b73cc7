import logging

import numpy as np
from scipy.optimize import differential_evolution

from count_copula.core.errors import ConfigError
from count_copula.core.fit_result import PF
from count_copula.estimators.base_estimator import (
    PENALTY,
    BaseEstimator,
    convergence_info,
    minimize_restarts,
)
from count_copula.estimators.iyw_estimator import with_yule_walker_start
from count_copula.particle_filters.base_particle_filter import (
    DEFAULT_ESS_THRESHOLD,
    DEFAULT_PARTICLES,
    SISR,
    CommonRandomNumbers,
    get_particle_filter,
)

logger = logging.getLogger(__name__)

CRN_MODE = "crn"
GLOBAL_MODE = "global"
DEFAULT_GLOBAL_GENERATIONS = 200
# search box half-width around the start, in unconstrained coordinates
GLOBAL_HALF_WIDTH = 4.0


def get_optimizer_modes():
    return [CRN_MODE, GLOBAL_MODE]


class PFEstimator(BaseEstimator):
    """Maximum likelihood with the likelihood approximated by a particle filter.

    In ``crn`` mode one uniform bank is drawn from ``seed`` and reused for every
    evaluation, which makes the objective smooth enough for Nelder-Mead. In
    ``global`` mode each evaluation draws fresh uniforms and differential
    evolution searches a box around the start.
    """

    name = PF

    def __init__(
        self,
        space,
        particles=DEFAULT_PARTICLES,
        filter_name=SISR,
        ess_threshold=DEFAULT_ESS_THRESHOLD,
        seed=0,
        optimizer_mode=CRN_MODE,
        global_generations=DEFAULT_GLOBAL_GENERATIONS,
        **kwargs,
    ):
        self.particles = particles
        self.filter_name = filter_name
        self.ess_threshold = ess_threshold
        self.seed = seed
        self.optimizer_mode = optimizer_mode
        self.global_generations = global_generations
        super().__init__(space, **kwargs)

    def validate(self):
        if self.optimizer_mode not in get_optimizer_modes():
            raise ConfigError(f"pf: optimizer_mode must be one of {get_optimizer_modes()}, got {self.optimizer_mode}")
        self.particle_filter = get_particle_filter(self.filter_name, self.particles, self.ess_threshold)

    def start(self, data):
        return with_yule_walker_start(self.space, super().start(data), data, self.link_order)

    def crn_objective(self, data, seed):
        crn = CommonRandomNumbers.from_seed(seed, self.particles, len(data))
        return self.space.penalized(lambda spec, model: self.particle_filter.run(data, spec, model, crn=crn).loglik)

    def fit(self, data):
        data = np.asarray(data, dtype=np.int64)
        x0 = self.space.to_unconstrained(self.start(data))
        objective = self.crn_objective(data, self.seed)
        start_value = objective(x0)
        if start_value >= PENALTY:
            # surfaces the ImpossibleDataError at the start point
            spec, model = self.space.assemble(self.space.from_unconstrained(x0))
            self.particle_filter.run(data, spec, model, seed=self.seed)

        if self.optimizer_mode == CRN_MODE:
            result = minimize_restarts(objective, x0, restarts=self.restarts)
        else:
            result = self._global_search(data, x0)
        estimates = self.space.from_unconstrained(result.x)

        # likelihood and curvature are both read off the fixed bank
        loglik = -objective(result.x)
        fit = self.result(
            estimates,
            data,
            loglik=float(loglik),
            std_errors=self.named_std_errors(objective, result.x),
            convergence=convergence_info(result),
            seed=self.seed,
            particles=self.particles,
            filter_name=self.filter_name,
        )
        if fit.std_errors is None and self.compute_std_errors:
            fit.flags.append("hessian_not_positive_definite")
        logger.info(f"{fit}")
        return fit

    def _global_search(self, data, x0):
        rng = np.random.default_rng(self.seed)

        def noisy(x):
            return self.crn_objective(data, int(rng.integers(2 ** 62)))(x)

        bounds = [(value - GLOBAL_HALF_WIDTH, value + GLOBAL_HALF_WIDTH) for value in x0]
        result = differential_evolution(
            noisy,
            bounds,
            popsize=10,
            maxiter=self.global_generations,
            seed=self.seed,
            polish=False,
            x0=x0,
            updating="immediate",
        )
        logger.debug(f"PF global search: {result.nfev} evaluations, best {result.fun:.4f}")
        return result
