import dataclasses
import logging
from typing import List, Union

import numpy as np

from count_copula.core.errors import ConfigError, ParameterDomainError
from count_copula.core.latent_gaussian import LatentModel, simulate_latent
from count_copula.marginals.base_marginal import (
    BaseMarginal,
    get_glm_families,
    get_marginal,
    marginal_class,
    param_layout,
    reparametrize,
)
from count_copula.utils.transforms import FIXED, POSITIVE, to_constrained

logger = logging.getLogger(__name__)

MEAN = "mean"
# exp() overflows a double beyond this
MAX_LOG_LINK = 709.0


@dataclasses.dataclass(frozen=True, eq=False)
class RegressionSpec:
    """Marginal whose linked parameter follows beta_0 + sum_j beta_j M_{j,t}.

    ``linked_param`` is "mean" (log link on the GLM mean) or the name of a
    canonical parameter, which then uses the inverse of its optimizer transform.
    """

    family: str
    beta: tuple
    covariates: np.ndarray  # (T+1) x J
    static_params: dict = dataclasses.field(default_factory=dict)
    linked_param: str = MEAN

    def __post_init__(self):
        beta = tuple(float(b) for b in np.atleast_1d(np.asarray(self.beta, dtype=float)))
        covariates = np.asarray(self.covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates[:, None]
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "covariates", covariates)
        if covariates.shape[1] != len(beta) - 1:
            raise ConfigError(
                f"regression: {len(beta)} coefficients need {len(beta) - 1} covariate columns, got {covariates.shape[1]}"
            )
        if self.linked_param == MEAN and self.family not in get_glm_families():
            raise ConfigError(f"{self.family}: no GLM mean parametrization, set linked_param to a parameter name")

    @property
    def length(self) -> int:
        return self.covariates.shape[0]

    def linear_predictor(self) -> np.ndarray:
        return self.beta[0] + self.covariates @ np.asarray(self.beta[1:])


def stationary_regression(family, beta0, length, static_params=None, linked_param=MEAN) -> RegressionSpec:
    """Regression with an intercept only."""
    return RegressionSpec(
        family=family,
        beta=(beta0,),
        covariates=np.zeros((length, 0)),
        static_params=dict(static_params or {}),
        linked_param=linked_param,
    )


def _glm_marginal(reg: RegressionSpec, mean):
    cls = marginal_class(reg.family)
    dispersion = []
    for name in cls.glm_names[1:]:
        if name not in reg.static_params:
            raise ConfigError(f"{reg.family}: static_params.{name} is required for a mean regression")
        dispersion.append(reg.static_params[name])
    return reparametrize(reg.family, (mean, *dispersion))


def theta_path(reg: RegressionSpec) -> List[BaseMarginal]:
    """Per-time marginals theta(t), t = 0..T."""
    eta = reg.linear_predictor()
    too_large = np.flatnonzero(eta > MAX_LOG_LINK)
    if reg.linked_param == MEAN:
        if len(too_large):
            raise ParameterDomainError(
                f"regression: linear predictor {eta[too_large[0]]:.6g} overflows exp() at t={too_large[0]}"
            )
        means = np.exp(eta)
        return [_glm_marginal(reg, mean) for mean in means]

    names, kinds = param_layout(reg.family, reg.static_params)
    if reg.linked_param not in names:
        raise ConfigError(f"{reg.family}: cannot link unknown parameter '{reg.linked_param}', expected one of {names}")
    kind = kinds[names.index(reg.linked_param)]
    if kind == FIXED:
        raise ConfigError(f"{reg.family}: parameter '{reg.linked_param}' is fixed and cannot be linked")
    if kind == POSITIVE and len(too_large):
        raise ParameterDomainError(
            f"regression: linear predictor {eta[too_large[0]]:.6g} overflows exp() at t={too_large[0]}"
        )
    values = to_constrained(eta, kind)
    path = []
    for t, value in enumerate(values):
        params = dict(reg.static_params)
        params[reg.linked_param] = float(value)
        try:
            path.append(get_marginal(reg.family, params))
        except ParameterDomainError as e:
            raise ParameterDomainError(f"regression: t={t}: {e}") from e
    return path


def simulate_counts(
    spec: Union[BaseMarginal, RegressionSpec],
    model: LatentModel,
    T,
    rng: np.random.Generator,
    return_latent=False,
):
    """Counts x_0..x_T with X_t = G_t(Z_t) for a latent ARMA path."""
    if isinstance(spec, RegressionSpec) and spec.length != T + 1:
        raise ConfigError(f"regression: covariates have {spec.length} rows, {T + 1} needed")
    z = simulate_latent(model, T, rng)
    if isinstance(spec, RegressionSpec):
        path = theta_path(spec)
        x = np.array([marginal.latent_quantile(z_t) for marginal, z_t in zip(path, z)], dtype=np.int64)
    else:
        x = np.asarray(spec.latent_quantile(z), dtype=np.int64)
    logger.debug(f"Simulated {T + 1} counts, sample mean {x.mean():.4g}")
    if return_latent:
        return x, z
    return x
