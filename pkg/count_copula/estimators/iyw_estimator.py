import logging

import numpy as np
from scipy.linalg import LinAlgError, solve_toeplitz

from count_copula.core.errors import ConfigError, CountCopulaError, RankError
from count_copula.core.fit_result import IYW
from count_copula.core.hermite_link import MINUS_ONE_EXACT, link_eval, link_inverse, link_table
from count_copula.core.latent_gaussian import LatentModel
from count_copula.estimators.base_estimator import (
    BaseEstimator,
    convergence_info,
    fit_marginal_iid,
    sample_acf,
)

logger = logging.getLogger(__name__)

# sample correlations are pulled this far inside (L(-1), 1) before inversion
ACF_CLAMP = 1e-4
ACF_CLAMPED = "acf_clamped"


def yule_walker_ar(data, marginal, order, link_order=25, clamp=ACF_CLAMP):
    """AR(p) coefficients from latent correlations implied by the count ACF.

    Returns ({"ar_1": ..}, flags); raises RankError on a singular system and
    ParameterDomainError when the solution is not causal.
    """
    rho_x = sample_acf(data, order)[1:]
    table = link_table(marginal, order=link_order, minus_one=MINUS_ONE_EXACT)
    lower = float(link_eval(table, -1.0))
    clipped = np.clip(rho_x, lower + clamp, 1.0 - clamp)
    flags = []
    if np.any(clipped != rho_x):
        flags.append(ACF_CLAMPED)
        logger.warning(
            f"IYW: sample ACF {np.round(rho_x, 4).tolist()} outside ({lower:.4f}, 1) for {marginal}, clamped"
        )
    gamma = np.r_[1.0, [link_inverse(table, r) for r in clipped]]
    try:
        phi = solve_toeplitz(gamma[:order], gamma[1:order + 1])
    except LinAlgError as e:
        raise RankError(f"IYW: latent Toeplitz system is singular: {e}") from e
    if not np.all(np.isfinite(phi)):
        raise RankError("IYW: latent Toeplitz system is singular")
    LatentModel(ar=tuple(phi))
    return {f"ar_{i + 1}": float(value) for i, value in enumerate(phi)}, flags


class IYWEstimator(BaseEstimator):
    """Marginal MLE, then Yule-Walker on latent correlations from the inverted link."""

    name = IYW

    def validate(self):
        if self.space.ma_order:
            raise ConfigError(
                f"iyw: implied Yule-Walker fits AR models only, MA order {self.space.ma_order} requested"
            )
        if self.space.is_regression:
            raise ConfigError("iyw: implied Yule-Walker needs a stationary marginal, covariates given")

    def fit(self, data):
        data = np.asarray(data)
        estimates, _, result = fit_marginal_iid(data, self.space, self.restarts)
        flags = []
        if self.space.ar_order:
            marginal, _ = self.space.marginal_only().assemble(estimates)
            ar, flags = yule_walker_ar(data, marginal, self.space.ar_order, self.link_order)
            estimates.update(ar)
        fit = self.result(
            {name: estimates[name] for name in self.space.names},
            data,
            convergence=convergence_info(result),
            flags=flags,
        )
        logger.info(f"{fit}")
        return fit


def with_yule_walker_start(space, start, data, link_order=25):
    """``start`` with its AR block replaced by Yule-Walker values when the model is a stationary AR."""
    if not space.ar_order or space.ma_order or space.is_regression:
        return start
    marginal, _ = space.marginal_only().assemble(start)
    try:
        ar, _ = yule_walker_ar(data, marginal, space.ar_order, link_order)
    except CountCopulaError as e:
        logger.debug(f"Yule-Walker start unavailable ({e}), AR starts at zero")
        return start
    return {**start, **ar}
