import logging
import math
from typing import Dict, List, Optional

import numpy as np
import statsmodels.api as sm
from scipy.optimize import OptimizeResult, minimize
from statsmodels.tools.numdiff import approx_fprime, approx_hess3
from statsmodels.tsa.stattools import acf

from count_copula.core.errors import (
    ConfigError,
    DataError,
    NumericalError,
    ParameterDomainError,
)
from count_copula.core.fit_result import GL, IYW, PF, FitResult, as_float_dict
from count_copula.core.latent_gaussian import LatentModel
from count_copula.core.sampler import MEAN, RegressionSpec, theta_path
from count_copula.marginals.base_marginal import (
    get_glm_families,
    get_marginal,
    marginal_class,
    param_layout,
)
from count_copula.utils.transforms import (
    FIXED,
    POSITIVE,
    REAL,
    constrain_ar,
    constrain_ma,
    to_constrained,
    to_unconstrained,
    unconstrain_ar,
    unconstrain_ma,
)

logger = logging.getLogger(__name__)

# objective value at infeasible trial points
PENALTY = 1e10
DEFAULT_RESTARTS = 3
DEFAULT_FATOL = 1e-6


class ParameterSpace:
    """Names, kinds and transforms of one model's free parameters.

    Marginal parameters come first (or ``beta_0..beta_J`` and the static
    parameters under a regression), then ``ar_1..ar_p`` and ``ma_1..ma_q``.
    The unconstrained vector maps AR and MA blocks through partial
    autocorrelations, so every point is causal and invertible.
    """

    def __init__(
        self,
        family,
        ar_order=0,
        ma_order=0,
        fixed=None,
        components=2,
        covariates=None,
        linked_param=MEAN,
    ):
        if ar_order < 0 or ma_order < 0:
            raise ConfigError(f"orders must be nonnegative, got ({ar_order}, {ma_order})")
        self.family = family
        self.ar_order = int(ar_order)
        self.ma_order = int(ma_order)
        self.fixed = dict(fixed or {})
        self.components = int(components)
        self.linked_param = linked_param
        self.covariates = None
        if covariates is not None:
            covariates = np.asarray(covariates, dtype=float)
            self.covariates = covariates[:, None] if covariates.ndim == 1 else covariates

        names, kinds = param_layout(family, self.fixed, self.components)
        if self.covariates is None:
            pairs = [(name, kind) for name, kind in zip(names, kinds) if kind != FIXED]
        elif linked_param == MEAN:
            if family not in get_glm_families():
                raise ConfigError(f"{family}: no GLM mean parametrization, set linked_param to a parameter name")
            static = [name for name in marginal_class(family).glm_names[1:] if name not in self.fixed]
            pairs = [(name, POSITIVE) for name in static]
        else:
            if linked_param not in names or kinds[names.index(linked_param)] == FIXED:
                raise ConfigError(f"{family}: cannot link parameter '{linked_param}', expected one of {names}")
            pairs = [(name, kind) for name, kind in zip(names, kinds) if kind != FIXED and name != linked_param]
        if self.covariates is not None:
            pairs = [(f"beta_{j}", REAL) for j in range(self.covariates.shape[1] + 1)] + pairs

        self.marginal_names = [name for name, _ in pairs]
        self.marginal_kinds = [kind for _, kind in pairs]
        self.ar_names = [f"ar_{i}" for i in range(1, self.ar_order + 1)]
        self.ma_names = [f"ma_{i}" for i in range(1, self.ma_order + 1)]

    def __str__(self) -> str:
        return f"{self.family} {self.names}"

    @property
    def names(self) -> List[str]:
        return self.marginal_names + self.ar_names + self.ma_names

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def is_regression(self) -> bool:
        return self.covariates is not None

    def marginal_only(self) -> "ParameterSpace":
        return ParameterSpace(
            self.family,
            fixed=self.fixed,
            components=self.components,
            covariates=self.covariates,
            linked_param=self.linked_param,
        )

    def to_unconstrained(self, estimates: Dict[str, float]) -> np.ndarray:
        marginal = [to_unconstrained(estimates[name], kind) for name, kind in zip(self.marginal_names, self.marginal_kinds)]
        ar = unconstrain_ar([estimates[name] for name in self.ar_names])
        ma = unconstrain_ma([estimates[name] for name in self.ma_names])
        return np.concatenate((np.asarray(marginal, dtype=float), ar, ma))

    def constrained_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = len(self.marginal_names)
        marginal = [to_constrained(value, kind) for value, kind in zip(x[:n], self.marginal_kinds)]
        ar = constrain_ar(x[n:n + self.ar_order])
        ma = constrain_ma(x[n + self.ar_order:])
        return np.concatenate((np.asarray(marginal, dtype=float), ar, ma))

    def from_unconstrained(self, x) -> Dict[str, float]:
        return as_float_dict(self.names, self.constrained_vector(x))

    def assemble(self, estimates: Dict[str, float]):
        """(marginal or regression spec, latent model) at named parameter values."""
        model = LatentModel(
            ar=tuple(estimates[name] for name in self.ar_names),
            ma=tuple(estimates[name] for name in self.ma_names),
        )
        if not self.is_regression:
            params = dict(self.fixed)
            params.update({name: estimates[name] for name in self.marginal_names})
            return get_marginal(self.family, params), model
        beta = tuple(estimates[f"beta_{j}"] for j in range(self.covariates.shape[1] + 1))
        static = dict(self.fixed)
        static.update({name: estimates[name] for name in self.marginal_names if not name.startswith("beta_")})
        spec = RegressionSpec(
            family=self.family,
            beta=beta,
            covariates=self.covariates,
            static_params=static,
            linked_param=self.linked_param,
        )
        return spec, model

    def initial_estimates(self, data) -> Dict[str, float]:
        """Method-of-moments marginal start (a Poisson GLM for beta); zero ARMA coefficients."""
        cls = marginal_class(self.family)
        guess = cls.initial_guess(data, self.fixed, self.components)
        estimates = {}
        if not self.is_regression:
            estimates.update({name: float(guess[name]) for name in self.marginal_names})
        elif self.linked_param == MEAN:
            design = sm.add_constant(self.covariates, has_constant="add")
            glm = sm.GLM(np.asarray(data, dtype=float), design, family=sm.families.Poisson()).fit()
            estimates.update({f"beta_{j}": float(b) for j, b in enumerate(glm.params)})
            dispersion = dict(zip(cls.glm_names, get_marginal(self.family, {**self.fixed, **guess}).glm_parameters()))
            # log-scale starts need a strictly positive dispersion
            estimates.update({name: max(float(dispersion[name]), 1e-3) for name in self.marginal_names if name in dispersion})
        else:
            names, kinds = param_layout(self.family, self.fixed, self.components)
            kind = kinds[names.index(self.linked_param)]
            estimates["beta_0"] = float(to_unconstrained(guess[self.linked_param], kind))
            estimates.update({f"beta_{j}": 0.0 for j in range(1, self.covariates.shape[1] + 1)})
            estimates.update({name: float(guess[name]) for name in self.marginal_names if name in guess})
        estimates.update({name: 0.0 for name in self.ar_names + self.ma_names})
        return {name: estimates[name] for name in self.names}

    def penalized(self, loglik_fn):
        """Negative log-likelihood over the unconstrained vector; infeasible points cost PENALTY."""

        def objective(x):
            try:
                value = loglik_fn(*self.assemble(self.from_unconstrained(x)))
            except (ParameterDomainError, NumericalError) as e:
                logger.debug(f"{self.family}: infeasible trial point: {e}")
                return PENALTY
            return -value if math.isfinite(value) else PENALTY

        return objective


def minimize_restarts(objective, x0, restarts=DEFAULT_RESTARTS, fatol=DEFAULT_FATOL, maxiter=None) -> OptimizeResult:
    """Adaptive Nelder-Mead, restarted from its own optimum while that still improves."""
    x0 = np.asarray(x0, dtype=float)
    options = {"adaptive": True, "fatol": fatol, "xatol": 1e-6, "maxiter": maxiter or 400 * max(len(x0), 1)}
    best = minimize(objective, x0, method="Nelder-Mead", options=options)
    iterations, evaluations, used = best.nit, best.nfev, 0
    for _ in range(restarts):
        candidate = minimize(objective, best.x, method="Nelder-Mead", options=options)
        iterations += candidate.nit
        evaluations += candidate.nfev
        used += 1
        improved = best.fun - candidate.fun
        if candidate.fun < best.fun:
            best = candidate
        if improved < fatol:
            break
        logger.debug(f"Nelder-Mead restart {used} improved objective by {improved:.3g}")
    best.nit, best.nfev, best.restarts = iterations, evaluations, used
    return best


def convergence_info(result: OptimizeResult) -> dict:
    return {
        "success": bool(result.success),
        "message": str(result.message),
        "iterations": int(getattr(result, "nit", 0)),
        "evaluations": int(getattr(result, "nfev", 0)),
        "restarts": int(getattr(result, "restarts", 0)),
    }


def hessian_std_errors(objective, x_hat, constrain=None) -> Optional[np.ndarray]:
    """Standard errors from the inverse Hessian of a negative log-likelihood.

    The Hessian is taken in the unconstrained coordinates; ``constrain`` maps
    them back and the covariance follows through its numerical Jacobian.
    Returns None when the Hessian is not positive definite.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    hessian = np.atleast_2d(approx_hess3(x_hat, objective))
    hessian = 0.5 * (hessian + hessian.T)
    if not np.all(np.isfinite(hessian)) or np.min(np.linalg.eigvalsh(hessian)) <= 0:
        logger.warning("Hessian is not positive definite, standard errors unavailable")
        return None
    covariance = np.linalg.inv(hessian)
    if constrain is not None:
        jacobian = np.atleast_2d(approx_fprime(x_hat, constrain, centered=True))
        covariance = jacobian @ covariance @ jacobian.T
    variances = np.diag(covariance)
    if np.any(variances < 0):
        return None
    return np.sqrt(variances)


def sample_acf(data, max_lag) -> np.ndarray:
    """Biased-divisor sample autocorrelations at lags 0..max_lag."""
    data = np.asarray(data, dtype=float)
    if not len(data) > max_lag:
        raise ConfigError(f"sample acf: {len(data)} observations cannot give lag {max_lag}")
    if np.all(data == data[0]):
        raise DataError("sample acf: series is constant, autocorrelation undefined")
    return acf(data, nlags=int(max_lag), adjusted=False, fft=False)


def iid_loglik(data):
    data = np.asarray(data)

    def loglik(spec, model):
        if isinstance(spec, RegressionSpec):
            return float(sum(marginal.log_pmf(x) for marginal, x in zip(theta_path(spec), data)))
        return float(np.sum(spec.log_pmf(data)))

    return loglik


def fit_marginal_iid(data, space: ParameterSpace, restarts=DEFAULT_RESTARTS):
    """Marginal MLE ignoring serial dependence: (estimates, loglik, optimizer result)."""
    space = space.marginal_only()
    objective = space.penalized(iid_loglik(data))
    x0 = space.to_unconstrained(space.initial_estimates(data))
    result = minimize_restarts(objective, x0, restarts=restarts, fatol=1e-10)
    estimates = space.from_unconstrained(result.x)
    logger.debug(f"{space.family}: IID marginal fit {estimates}, loglik {-result.fun:.4f}")
    return estimates, -float(result.fun), result


class BaseEstimator:
    name = None

    def __init__(self, space: ParameterSpace, restarts=DEFAULT_RESTARTS, link_order=25, std_errors=True):
        self.space = space
        self.restarts = restarts
        self.link_order = link_order
        self.compute_std_errors = std_errors
        self.validate()

    def __str__(self) -> str:
        return f"{self.name.upper()} estimator for {self.space}"

    def validate(self):
        pass

    def fit(self, data) -> FitResult:
        raise NotImplementedError

    def start(self, data) -> Dict[str, float]:
        """Marginal MLE for the marginal block, zeros elsewhere."""
        estimates, _, _ = fit_marginal_iid(data, self.space, self.restarts)
        start = {name: 0.0 for name in self.space.names}
        start.update(estimates)
        return start

    def result(self, estimates, data, **kwargs) -> FitResult:
        return FitResult(
            method=self.name,
            family=self.space.family,
            estimates=estimates,
            ar_order=self.space.ar_order,
            ma_order=self.space.ma_order,
            n_obs=len(data),
            fixed=self.space.fixed,
            components=self.space.components,
            linked_param=self.space.linked_param,
            link_order=self.link_order,
            **kwargs,
        )

    def named_std_errors(self, objective, x_hat) -> Optional[Dict[str, float]]:
        if not self.compute_std_errors:
            return None
        errors = hessian_std_errors(objective, x_hat, self.space.constrained_vector)
        return None if errors is None else as_float_dict(self.space.names, errors)


# Common support methods for all estimators
def get_supported_estimators() -> List[str]:
    return [GL, IYW, PF]


def get_estimator(name, space: ParameterSpace, **options) -> BaseEstimator:
    if name == GL:
        from count_copula.estimators.gl_estimator import GLEstimator

        return GLEstimator(space, **options)
    elif name == IYW:
        from count_copula.estimators.iyw_estimator import IYWEstimator

        return IYWEstimator(space, **options)
    elif name == PF:
        from count_copula.estimators.pf_estimator import PFEstimator

        return PFEstimator(space, **options)
    else:
        raise ConfigError(f"Invalid estimator: {name}")
