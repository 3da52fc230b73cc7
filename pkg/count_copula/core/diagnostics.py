import dataclasses
import logging
import math

import numpy as np
import pandas as pd
from scipy.stats import shapiro
from statsmodels.stats.stattools import jarque_bera
from statsmodels.tsa.stattools import acf, pacf

from count_copula.core.errors import DataError
from count_copula.core.latent_gaussian import LatentModel, arma_acvf, durbin_levinson
from count_copula.particle_filters.base_particle_filter import (
    DEFAULT_ESS_THRESHOLD,
    DEFAULT_PARTICLES,
    SISR,
    get_particle_filter,
    observation_bounds,
)
from count_copula.utils.utils import LOG_SQRT_2PI, log_interval_prob

logger = logging.getLogger(__name__)

DEFAULT_BINS = 10
MAX_SUMMARY_LAG = 20
MIN_SUMMARY_LENGTH = 20
BAND_Z = 1.96


@dataclasses.dataclass(frozen=True, eq=False)
class PitHistogram:
    bins: int
    heights: np.ndarray
    mean_pit_curve: np.ndarray  # F-bar(h / H), h = 0..H

    def frame(self) -> pd.DataFrame:
        edges = np.arange(self.bins + 1) / self.bins
        return pd.DataFrame(
            {
                "bin": np.arange(1, self.bins + 1),
                "lower": edges[:-1],
                "upper": edges[1:],
                "height": self.heights,
            }
        )


def pit_from_predictive(p_upper, p_lower, bins=DEFAULT_BINS) -> PitHistogram:
    """Non-randomized PIT histogram from P_t(x_t) and P_t(x_t - 1).

    F_t(u) is 0 below P_t(x_t - 1), 1 above P_t(x_t) and linear in between;
    F-bar averages it over t.
    """
    if bins < 1:
        raise DataError(f"pit: bins must be at least 1, got {bins}")
    upper = np.asarray(p_upper, dtype=float)[:, None]
    lower = np.asarray(p_lower, dtype=float)[:, None]
    u = (np.arange(bins + 1) / bins)[None, :]
    width = upper - lower
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = np.where(width > 0, (u - lower) / width, (u >= upper).astype(float))
    curve = np.clip(ramp, 0.0, 1.0).mean(axis=0)
    curve[0], curve[-1] = 0.0, 1.0
    curve = np.maximum.accumulate(curve)
    return PitHistogram(bins=int(bins), heights=np.diff(curve), mean_pit_curve=curve)


def pit_histogram(
    data,
    spec,
    model: LatentModel,
    bins=DEFAULT_BINS,
    particles=DEFAULT_PARTICLES,
    filter_name=SISR,
    ess_threshold=DEFAULT_ESS_THRESHOLD,
    seed=None,
):
    """PIT histogram from one filter pass at the given parameters.

    At t = 0 the filter has no history, so P_0 is the marginal CDF.
    Returns (histogram, particle system).
    """
    pf = get_particle_filter(filter_name, particles, ess_threshold)
    ps = pf.run(data, spec, model, seed=seed)
    return pit_from_predictive(ps.trace.p_upper, ps.trace.p_lower, bins), ps


@dataclasses.dataclass(frozen=True, eq=False)
class LatentResiduals:
    counts: np.ndarray
    conditional_means: np.ndarray  # Z-hat_t = E[Z_t | X_t = x_t]
    predictions: np.ndarray
    residuals: np.ndarray
    scales: np.ndarray

    @property
    def standardized(self) -> np.ndarray:
        return self.residuals / self.scales

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": np.arange(len(self.counts)),
                "x": self.counts,
                "zhat": self.conditional_means,
                "residual": self.residuals,
                "standardized": self.standardized,
            }
        )


def conditional_latent_means(data, spec) -> np.ndarray:
    """E[Z | G(Z) = x_t] = (phi(a) - phi(b)) / (Phi(b) - Phi(a)) over the latent interval (a, b)."""
    lower, upper = observation_bounds(np.asarray(data, dtype=np.int64), spec)
    log_mass = log_interval_prob(lower, upper)
    with np.errstate(over="ignore", invalid="ignore"):
        log_phi_lower = np.where(np.isfinite(lower), -0.5 * lower ** 2 - LOG_SQRT_2PI, -np.inf)
        log_phi_upper = np.where(np.isfinite(upper), -0.5 * upper ** 2 - LOG_SQRT_2PI, -np.inf)
        return np.exp(log_phi_lower - log_mass) - np.exp(log_phi_upper - log_mass)


def latent_residuals(data, spec, model: LatentModel) -> LatentResiduals:
    """Residuals of the centered Z-hat series against its best linear prediction under ``model``."""
    data = np.asarray(data, dtype=np.int64)
    zhat = conditional_latent_means(data, spec)
    centered = zhat - zhat.mean()
    state = durbin_levinson(arma_acvf(model, len(data)), centered)
    residuals = centered - state.predictions
    return LatentResiduals(
        counts=data,
        conditional_means=zhat,
        predictions=state.predictions,
        residuals=residuals,
        scales=state.scales[: len(data)],
    )


@dataclasses.dataclass(frozen=True, eq=False)
class ResidualSummary:
    n: int
    acf: np.ndarray  # lags 1..max_lag
    pacf: np.ndarray
    band: float
    jarque_bera: float
    jarque_bera_pvalue: float
    skewness: float
    kurtosis: float
    shapiro_pvalue: float

    @property
    def max_lag(self) -> int:
        return len(self.acf)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "lag": np.arange(1, self.max_lag + 1),
                "acf": self.acf,
                "pacf": self.pacf,
                "band_lower": -self.band,
                "band_upper": self.band,
                "acf_outside": np.abs(self.acf) > self.band,
                "pacf_outside": np.abs(self.pacf) > self.band,
            }
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "max_lag": self.max_lag,
            "band": self.band,
            "acf_outside": int(np.sum(np.abs(self.acf) > self.band)),
            "pacf_outside": int(np.sum(np.abs(self.pacf) > self.band)),
            "jarque_bera": self.jarque_bera,
            "jarque_bera_pvalue": self.jarque_bera_pvalue,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "shapiro_pvalue": self.shapiro_pvalue,
        }


def residual_summaries(residuals, max_lag=MAX_SUMMARY_LAG) -> ResidualSummary:
    """Sample ACF/PACF with +-1.96/sqrt(n) bands and normality tests."""
    residuals = np.asarray(residuals, dtype=float)
    n = len(residuals)
    if n < MIN_SUMMARY_LENGTH:
        raise DataError(f"residual summary: at least {MIN_SUMMARY_LENGTH} residuals needed, got {n}")
    if not np.all(np.isfinite(residuals)):
        raise DataError("residual summary: residuals contain non-finite values")
    lags = min(int(max_lag), n // 2 - 1)
    jb, jb_pvalue, skewness, kurtosis = jarque_bera(residuals)
    return ResidualSummary(
        n=n,
        acf=acf(residuals, nlags=lags, fft=False)[1:],
        pacf=pacf(residuals, nlags=lags)[1:],
        band=BAND_Z / math.sqrt(n),
        jarque_bera=float(jb),
        jarque_bera_pvalue=float(jb_pvalue),
        skewness=float(skewness),
        kurtosis=float(kurtosis),
        shapiro_pvalue=float(shapiro(residuals).pvalue),
    )

