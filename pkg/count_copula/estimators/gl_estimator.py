import functools
import logging

import numpy as np
from scipy.linalg import toeplitz

from count_copula.core.fit_result import GL
from count_copula.core.hermite_link import (
    MINUS_ONE_EXACT,
    hermite_coeffs,
    link_eval,
    link_table,
    log_factorials,
)
from count_copula.core.latent_gaussian import (
    LatentModel,
    arma_acvf,
    gaussian_loglik,
    gaussian_loglik_dense,
)
from count_copula.core.sampler import RegressionSpec, theta_path
from count_copula.estimators.base_estimator import BaseEstimator, convergence_info, minimize_restarts
from count_copula.estimators.iyw_estimator import with_yule_walker_start
from count_copula.marginals.base_marginal import get_marginal

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=8192)
def _scaled_hermite(family, params, order):
    """sqrt(k!) g_k for k = 1..order."""
    marginal = get_marginal(family, params)
    return hermite_coeffs(marginal.cum_table(), order) * np.exp(0.5 * log_factorials(order))


def count_acvf(marginal, model: LatentModel, max_lag, link_order=25) -> np.ndarray:
    """gamma_X(0..max_lag) = Var(X) L(rho_Z(h)) with the pseudo-corrected link."""
    table = link_table(marginal, order=link_order, minus_one=MINUS_ONE_EXACT)
    rho = arma_acvf(model, max_lag)
    return table.variance * np.asarray(link_eval(table, rho))


def count_covariance(path, model: LatentModel, link_order=25) -> np.ndarray:
    """Cov(X_s, X_t) = sum_k k! g_k(s) g_k(t) rho_Z(|s-t|)^k; the diagonal holds Var(X_t)."""
    rho = toeplitz(arma_acvf(model, len(path) - 1))
    scaled = np.array([_scaled_hermite(m.family, tuple(m.params), link_order) for m in path])
    covariance = np.zeros_like(rho)
    power = np.ones_like(rho)
    for k in range(link_order):
        power = power * rho
        covariance += np.outer(scaled[:, k], scaled[:, k]) * power
    np.fill_diagonal(covariance, [m.moments()[1] for m in path])
    return covariance


def gl_loglik(data, spec, model: LatentModel, link_order=25) -> float:
    """Gaussian log-density of the counts with the copula's mean and covariance."""
    data = np.asarray(data, dtype=float)
    if isinstance(spec, RegressionSpec):
        path = theta_path(spec)
        means = np.array([m.moments()[0] for m in path])
        return gaussian_loglik_dense(count_covariance(path, model, link_order), means, data)
    mean, _ = spec.moments()
    return gaussian_loglik(count_acvf(spec, model, len(data) - 1, link_order), mean, data)


class GLEstimator(BaseEstimator):
    """Gaussian pseudo-likelihood: treat the counts as Gaussian with the model's first two moments."""

    name = GL

    def start(self, data):
        return with_yule_walker_start(self.space, super().start(data), data, self.link_order)

    def fit(self, data):
        data = np.asarray(data)
        loglik = functools.partial(gl_loglik, data, link_order=self.link_order)
        objective = self.space.penalized(loglik)
        x0 = self.space.to_unconstrained(self.start(data))
        result = minimize_restarts(objective, x0, restarts=self.restarts)
        estimates = self.space.from_unconstrained(result.x)
        fit = self.result(
            estimates,
            data,
            loglik=-float(result.fun),
            std_errors=self.named_std_errors(objective, result.x),
            convergence=convergence_info(result),
        )
        if fit.std_errors is None and self.compute_std_errors:
            fit.flags.append("hessian_not_positive_definite")
        logger.info(f"{fit}")
        return fit
