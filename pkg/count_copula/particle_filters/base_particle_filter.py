import dataclasses
import logging
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr, ndtri_exp

from count_copula.core.errors import ConfigError, DataError, ImpossibleDataError
from count_copula.core.latent_gaussian import LatentModel, arma_acvf, dl_recursion
from count_copula.core.sampler import RegressionSpec, theta_path
from count_copula.marginals.base_marginal import BaseMarginal
from count_copula.utils.utils import log_interval_prob

logger = logging.getLogger(__name__)

SIS = "sis"
SISR = "sisr"
APF = "apf"

DEFAULT_PARTICLES = 1000
DEFAULT_ESS_THRESHOLD = 0.5


@dataclasses.dataclass(frozen=True, eq=False)
class CommonRandomNumbers:
    """Uniform banks that fully determine a filter pass."""

    uniforms: np.ndarray  # N x (T+1), truncated normal draws
    resample: np.ndarray  # N x (T+1), ancestor selection

    @classmethod
    def from_seed(cls, seed, particles, length):
        rng = np.random.default_rng(seed)
        return cls(uniforms=rng.random((particles, length)), resample=rng.random((particles, length)))

    @property
    def particles(self) -> int:
        return self.uniforms.shape[0]

    @property
    def length(self) -> int:
        return self.uniforms.shape[1]


@dataclasses.dataclass(eq=False)
class FilterTrace:
    ess: np.ndarray
    log_increment: np.ndarray
    resampled: np.ndarray
    p_upper: np.ndarray  # P_t(x_t)
    p_lower: np.ndarray  # P_t(x_t - 1)

    @classmethod
    def empty(cls, length):
        return cls(
            ess=np.zeros(length),
            log_increment=np.zeros(length),
            resampled=np.zeros(length, dtype=bool),
            p_upper=np.zeros(length),
            p_lower=np.zeros(length),
        )


@dataclasses.dataclass(eq=False)
class ParticleSystem:
    filter_name: str
    particles: int
    loglik: float
    log_weights: np.ndarray
    next_predictions: np.ndarray  # z-hat_{T+1} per particle
    next_scale: float  # r_{T+1}
    trace: FilterTrace
    ess_threshold: float

    @property
    def weights(self) -> np.ndarray:
        """Normalized weights w^i / Omega."""
        w = np.exp(self.log_weights - np.max(self.log_weights))
        return w / w.sum()

    @property
    def ess(self) -> float:
        return float(1.0 / np.sum(self.weights ** 2))


def truncated_normal_draw(a, b, u, strict=False):
    """Inverse-CDF draw from N(0, 1) restricted to (a, b), stable in both tails."""
    a, b, u = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(u, dtype=float)
    )
    empty = ~(a < b)
    if strict and np.any(empty | (log_interval_prob(a, b) == -np.inf)):
        raise ImpossibleDataError(None, "truncated normal: interval has zero probability")

    # work in the lower half line so log_ndtr stays accurate
    flip = a >= 0
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)
    v = np.where(flip, 1.0 - u, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.logaddexp(log_ndtr(lo) + np.log1p(-v), log_ndtr(hi) + np.log(v))
        x = ndtri_exp(log_p)
    x = np.where(flip, -x, x)
    x = np.clip(x, np.nextafter(a, np.inf), np.nextafter(b, -np.inf))

    fallback = np.where(np.isfinite(a), a, np.where(np.isfinite(b), b, 0.0))
    x = np.where(np.isfinite(x) & ~empty, x, fallback)
    return x[()]


def resample_indices(log_weights, uniforms) -> np.ndarray:
    """Multinomial ancestor indices, one per uniform."""
    log_weights = np.asarray(log_weights, dtype=float)
    w = np.exp(log_weights - np.max(log_weights))
    cumulative = np.cumsum(w / w.sum())
    idx = np.searchsorted(cumulative, np.asarray(uniforms, dtype=float), side="right")
    return np.minimum(idx, len(log_weights) - 1)


def _normalized(log_weights):
    w = np.exp(log_weights - np.max(log_weights))
    return w / w.sum()


class BaseParticleFilter:
    name = None

    def __init__(self, particles=DEFAULT_PARTICLES, ess_threshold=DEFAULT_ESS_THRESHOLD):
        if particles < 1:
            raise ConfigError(f"particles must be at least 1, got {particles}")
        if not 0.0 <= ess_threshold <= 1.0:
            raise ConfigError(f"ess_threshold must lie in [0, 1], got {ess_threshold}")
        self.particles = int(particles)
        self.ess_threshold = float(ess_threshold)

    def __str__(self) -> str:
        return f"{self.name}(particles={self.particles}, ess_threshold={self.ess_threshold})"

    # hooks
    def select_ancestors(self, log_weights, log_inc, uniforms) -> Optional[np.ndarray]:
        """Ancestor indices chosen before propagation, or None."""
        return None

    def should_resample(self, ess) -> bool:
        return False

    def run(
        self,
        data,
        spec: Union[BaseMarginal, RegressionSpec, Sequence[BaseMarginal]],
        model: LatentModel,
        crn: Optional[CommonRandomNumbers] = None,
        seed=None,
    ) -> ParticleSystem:
        """One filter pass over ``data``; returns the final particle system and its trace."""
        data = np.asarray(data)
        if data.ndim != 1 or len(data) == 0:
            raise DataError("particle filter: data must be a non-empty 1-d count vector")
        if np.any(data < 0):
            raise DataError(f"particle filter: negative count at t={int(np.flatnonzero(data < 0)[0])}")
        data = data.astype(np.int64)
        length = len(data)
        n = self.particles

        lower, upper = observation_bounds(data, spec)
        if crn is None:
            crn = CommonRandomNumbers.from_seed(seed, n, length)
        if crn.particles != n or crn.length < length:
            raise ConfigError(
                f"CRN bank of shape {crn.uniforms.shape} does not fit {n} particles x {length} steps"
            )

        recursion = dl_recursion(arma_acvf(model, length), length)
        scales = np.sqrt(recursion.variances)
        history = np.zeros((n, recursion.memory))
        log_weights = np.zeros(n)
        loglik = 0.0
        trace = FilterTrace.empty(length)

        for t in range(length):
            pred = recursion.predict(t, history)
            a = (lower[t] - pred) / scales[t]
            b = (upper[t] - pred) / scales[t]
            log_inc = log_interval_prob(a, b)

            weights = _normalized(log_weights)
            trace.p_upper[t] = float(weights @ ndtr(b))
            trace.p_lower[t] = float(weights @ ndtr(a))

            combined = logsumexp(log_weights + log_inc)
            if combined == -np.inf:
                raise ImpossibleDataError(t)
            step = combined - logsumexp(log_weights)
            loglik += step
            trace.log_increment[t] = step

            ancestors = self.select_ancestors(log_weights, log_inc, crn.resample[:, t])
            if ancestors is not None:
                pred, a, b, history = pred[ancestors], a[ancestors], b[ancestors], history[ancestors]
                log_weights = np.zeros(n)
            else:
                log_weights = log_weights + log_inc

            z = pred + scales[t] * truncated_normal_draw(a, b, crn.uniforms[:, t])
            if recursion.memory:
                history = np.concatenate((z[:, None], history[:, :-1]), axis=1)

            ess = float(1.0 / np.sum(_normalized(log_weights) ** 2))
            if self.should_resample(ess):
                idx = resample_indices(log_weights, crn.resample[:, t])
                history = history[idx]
                log_weights = np.zeros(n)
                trace.resampled[t] = True
                logger.debug(f"{self.name}: resampled at t={t} (ESS {ess:.1f} of {n})")
                ess = float(n)
            trace.ess[t] = ess

        next_predictions = recursion.predict(length, history)
        return ParticleSystem(
            filter_name=self.name,
            particles=n,
            loglik=float(loglik),
            log_weights=log_weights,
            next_predictions=next_predictions,
            next_scale=float(scales[length]),
            trace=trace,
            ess_threshold=self.ess_threshold,
        )


def observation_bounds(data, spec):
    """Latent intervals (Phi^{-1}(C_{x_t - 1}), Phi^{-1}(C_{x_t})) for every observation."""
    if isinstance(spec, BaseMarginal):
        lower, upper = spec.latent_bounds(data)
        lower, upper = np.atleast_1d(lower).astype(float), np.atleast_1d(upper).astype(float)
    else:
        path: List[BaseMarginal] = theta_path(spec) if isinstance(spec, RegressionSpec) else list(spec)
        if len(path) != len(data):
            raise ConfigError(f"particle filter: {len(path)} marginals for {len(data)} observations")
        bounds = [marginal.latent_bounds(x) for marginal, x in zip(path, data)]
        lower = np.array([bound[0] for bound in bounds], dtype=float)
        upper = np.array([bound[1] for bound in bounds], dtype=float)
    impossible = np.flatnonzero(~(lower < upper) | (log_interval_prob(lower, upper) == -np.inf))
    if len(impossible):
        raise ImpossibleDataError(int(impossible[0]))
    return lower, upper


def filter_expectation(ps: ParticleSystem, fn) -> float:
    """sum_i W^i fn(z-hat_{T+1}^i)."""
    values = np.broadcast_to(np.asarray(fn(ps.next_predictions), dtype=float), ps.next_predictions.shape)
    return float(ps.weights @ values)


def predictive_cdf(ps: ParticleSystem, marginal: BaseMarginal, y):
    """P(X_{T+1} <= y | x_0..x_T)."""
    y = np.asarray(y)
    _, upper = marginal.latent_bounds(np.maximum(y, 0))
    upper = np.atleast_1d(upper)
    probs = ndtr((upper[None, :] - ps.next_predictions[:, None]) / ps.next_scale)
    out = ps.weights @ probs
    out = np.where(np.atleast_1d(y) < 0, 0.0, out)
    return out.reshape(y.shape)[()]


def predictive_pmf(ps: ParticleSystem, marginal: BaseMarginal, y):
    """P(X_{T+1} = y | x_0..x_T)."""
    y = np.asarray(y)
    return (predictive_cdf(ps, marginal, y) - predictive_cdf(ps, marginal, y - 1))[()]


def predictive_expectation(ps: ParticleSystem, marginal: BaseMarginal, fn, max_count=None) -> float:
    """E[fn(X_{T+1}) | x_0..x_T], summed over 0..max_count."""
    if max_count is None:
        max_count = marginal.cum_table().cutoff + 1
    support = np.arange(max_count + 1)
    values = np.broadcast_to(np.asarray(fn(support), dtype=float), support.shape)
    return float(values @ predictive_pmf(ps, marginal, support))


# Common support methods for all particle filters
def get_supported_filters():
    return [SIS, SISR, APF]


def get_particle_filter(name, particles=DEFAULT_PARTICLES, ess_threshold=DEFAULT_ESS_THRESHOLD) -> BaseParticleFilter:
    if name == SIS:
        from count_copula.particle_filters.sis_filter import SISFilter

        return SISFilter(particles, ess_threshold)
    elif name == SISR:
        from count_copula.particle_filters.sisr_filter import SISRFilter

        return SISRFilter(particles, ess_threshold)
    elif name == APF:
        from count_copula.particle_filters.apf_filter import APFFilter

        return APFFilter(particles, ess_threshold)
    else:
        raise ConfigError(f"Invalid particle filter: {name}")
