import dataclasses
import logging
import math
from typing import List

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, toeplitz
from scipy.stats import multivariate_normal
from statsmodels.tsa.arima_process import ArmaProcess, arma_acovf

from count_copula.core.errors import DefinitenessError, ParameterDomainError, RankError
from count_copula.utils.utils import LOG_SQRT_2PI

logger = logging.getLogger(__name__)

# partial autocorrelations below this are treated as zero
DL_TOL = 1e-13
# largest residual, relative to gamma(0), a frozen row may leave on the remaining lags
DL_TAIL_TOL = 1e-10


@dataclasses.dataclass(frozen=True)
class LatentModel:
    """Causal, invertible ARMA(p, q) scaled to unit marginal variance.

    Z_t = phi_1 Z_{t-1} + ... + phi_p Z_{t-p} + e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}
    """

    ar: tuple = ()
    ma: tuple = ()

    def __post_init__(self):
        ar = tuple(float(a) for a in np.atleast_1d(np.asarray(self.ar, dtype=float)))
        ma = tuple(float(m) for m in np.atleast_1d(np.asarray(self.ma, dtype=float)))
        object.__setattr__(self, "ar", ar)
        object.__setattr__(self, "ma", ma)
        for name, values in (("ar", ar), ("ma", ma)):
            for i, value in enumerate(values):
                if not np.isfinite(value):
                    raise ParameterDomainError(f"latent.{name}[{i}]: coefficient must be finite, got {value}")
        process = self.process
        if not process.isstationary:
            raise ParameterDomainError(f"latent.ar: {list(ar)} is not causal (AR roots inside the unit circle)")
        if not process.isinvertible:
            raise ParameterDomainError(f"latent.ma: {list(ma)} is not invertible (MA roots on or inside the unit circle)")

    def __str__(self) -> str:
        return f"ARMA({len(self.ar)},{len(self.ma)}) ar={list(self.ar)} ma={list(self.ma)}"

    @property
    def order(self):
        return len(self.ar), len(self.ma)

    @property
    def is_white_noise(self) -> bool:
        return not any(self.ar) and not any(self.ma)

    @property
    def process(self) -> ArmaProcess:
        return ArmaProcess(np.r_[1.0, -np.asarray(self.ar)], np.r_[1.0, np.asarray(self.ma)])

    @property
    def innovation_variance(self) -> float:
        """sigma^2 making gamma_Z(0) = 1."""
        raw = arma_acovf(self.process.ar, self.process.ma, nobs=1)
        return float(1.0 / raw[0])


@dataclasses.dataclass(frozen=True, eq=False)
class DLState:
    predictions: np.ndarray  # z-hat_0 .. z-hat_T, z-hat_0 = 0
    variances: np.ndarray  # r_0^2 .. r_T^2
    coefficients: List[np.ndarray]  # row t predicts z_{t+1} from z_t, z_{t-1}, ...

    @property
    def scales(self) -> np.ndarray:
        return np.sqrt(self.variances)


@dataclasses.dataclass(frozen=True, eq=False)
class DLRecursion:
    coefficients: List[np.ndarray]
    variances: np.ndarray
    memory: int  # longest coefficient row

    def predict(self, t, history):
        """z-hat_t from ``history`` holding z_{t-1}, z_{t-2}, ... along its last axis."""
        if t == 0:
            return np.zeros(np.shape(history)[:-1])
        row = self.coefficients[t - 1]
        return history[..., : len(row)] @ row


def arma_acvf(model: LatentModel, max_lag) -> np.ndarray:
    """gamma_Z(0..max_lag) normalized to gamma_Z(0) = 1."""
    raw = arma_acovf(model.process.ar, model.process.ma, nobs=int(max_lag) + 1)
    return raw / raw[0]


def dl_recursion(acvf, steps, tol=DL_TOL) -> DLRecursion:
    """Durbin-Levinson prediction coefficients and MSEs for ``steps`` one-step predictions.

    Trailing entries below ``tol`` are dropped from every row. Once two
    consecutive partial autocorrelations fall below ``tol`` and the last row
    reproduces every remaining lag of ``acvf``, later rows repeat it. Zero
    partial autocorrelations ahead of a seasonal or subset lag fail that check.
    """
    acvf = np.asarray(acvf, dtype=float)
    variances = np.empty(steps + 1)
    variances[0] = acvf[0]
    if not acvf[0] > 0:
        raise RankError(f"autocovariance at lag 0 must be positive, got {acvf[0]}")

    def trimmed(row):
        keep = np.flatnonzero(np.abs(row) >= tol)
        return row[: keep[-1] + 1] if len(keep) else row[:0]

    rows = []
    previous = np.empty(0)
    small = 0
    for i in range(steps):
        if small >= 2:
            rows.append(rows[-1])
            variances[i + 1] = variances[i]
            continue
        if i + 1 >= len(acvf):
            raise RankError(f"autocovariance given to lag {len(acvf) - 1}, {i + 1} needed")
        phi_nn = (acvf[i + 1] - previous @ acvf[i:0:-1]) / variances[i]
        if not abs(phi_nn) < 1.0:
            raise RankError(f"Toeplitz system singular at lag {i + 1} (partial autocorrelation {phi_nn:.6g})")
        current = np.empty(i + 1)
        current[:i] = previous - phi_nn * previous[::-1]
        current[i] = phi_nn
        variances[i + 1] = variances[i] * (1.0 - phi_nn ** 2)
        if not variances[i + 1] > 0:
            raise RankError(f"prediction variance not positive at step {i + 1}")
        small = small + 1 if abs(phi_nn) < tol else 0
        rows.append(trimmed(current))
        previous = current
        if small >= 2:
            if _explains_tail(acvf, rows[-1], i + 2, steps):
                logger.debug(f"Durbin-Levinson rows frozen after {i + 1} steps, memory {len(rows[-1])}")
            else:
                small = 0

    memory = max((len(row) for row in rows), default=0)
    return DLRecursion(coefficients=rows, variances=variances, memory=memory)


def _explains_tail(acvf, row, start, stop) -> bool:
    """Whether gamma(k) = sum_j row[j] gamma(k - 1 - j) for k in [start, stop]."""
    stop = min(stop, len(acvf) - 1)
    if start > stop:
        return True
    residuals = np.convolve(acvf[: stop + 1], np.r_[1.0, -row])[start: stop + 1]
    return bool(np.max(np.abs(residuals)) < DL_TAIL_TOL * acvf[0])


def durbin_levinson(acvf, data) -> DLState:
    """One-step predictions and MSEs of ``data`` under a zero-mean process with ``acvf``."""
    data = np.asarray(data, dtype=float)
    recursion = dl_recursion(acvf, len(data) - 1)
    predictions = np.zeros(len(data))
    for t in range(1, len(data)):
        row = recursion.coefficients[t - 1]
        predictions[t] = data[t - 1:: -1][: len(row)] @ row
    return DLState(predictions=predictions, variances=recursion.variances, coefficients=recursion.coefficients)


def gaussian_loglik(acvf, mean, data) -> float:
    """Gaussian log-density via the innovations decomposition."""
    data = np.asarray(data, dtype=float)
    centered = data - np.broadcast_to(np.asarray(mean, dtype=float), data.shape)
    try:
        state = durbin_levinson(acvf, centered)
    except RankError as e:
        raise DefinitenessError(f"autocovariance is not positive definite: {e}") from e
    innovations = centered - state.predictions
    quad = np.sum(innovations ** 2 / state.variances)
    log_det = np.sum(np.log(state.variances))
    return float(-0.5 * (quad + log_det) - len(data) * LOG_SQRT_2PI)


def gaussian_loglik_dense(cov, mean, data) -> float:
    """Gaussian log-density through a Cholesky factor of the full covariance."""
    data = np.asarray(data, dtype=float)
    centered = data - np.broadcast_to(np.asarray(mean, dtype=float), data.shape)
    try:
        factor = cho_factor(np.asarray(cov, dtype=float), lower=True)
    except LinAlgError as e:
        raise DefinitenessError(f"covariance matrix is not positive definite: {e}") from e
    log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
    quad = centered @ cho_solve(factor, centered)
    return float(-0.5 * (quad + log_det) - len(data) * LOG_SQRT_2PI)


def simulate_latent(model: LatentModel, T, rng: np.random.Generator) -> np.ndarray:
    """A stationary draw z_0..z_T built from the innovations recursion."""
    recursion = dl_recursion(arma_acvf(model, T), T)
    shocks = rng.standard_normal(T + 1) * np.sqrt(recursion.variances)
    z = np.empty(T + 1)
    z[0] = shocks[0]
    for t in range(1, T + 1):
        row = recursion.coefficients[t - 1]
        z[t] = z[t - 1:: -1][: len(row)] @ row + shocks[t]
    return z


def rectangle_likelihood(acvf, lower, upper, abseps=1e-7, releps=1e-7, maxpts=None) -> float:
    """P(lower < Z < upper) for a zero-mean Gaussian vector with Toeplitz covariance."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n = len(lower)
    cov = toeplitz(np.asarray(acvf, dtype=float)[:n])
    kwargs = {"abseps": abseps, "releps": releps}
    if maxpts is not None:
        kwargs["maxpts"] = maxpts
    value = float(multivariate_normal.cdf(upper, mean=np.zeros(n), cov=cov, lower_limit=lower, **kwargs))
    return max(value, 0.0) if math.isfinite(value) else 0.0
