import dataclasses
import functools
import logging
import math

import numpy as np
import pandas as pd
from numpy.polynomial import hermite_e
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq
from scipy.special import gammaln

from count_copula.core.errors import (
    ConfigError,
    DegenerateMarginalError,
    LinkRangeError,
    ParameterDomainError,
)
from count_copula.marginals.base_marginal import BaseMarginal, CumTable, get_marginal
from count_copula.utils.utils import interval_prob

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 25
DEFAULT_MC_PATHS = 10 ** 6
TRUNCATION_EPS = 0.01
MINUS_ONE_MC = "mc"
MINUS_ONE_EXACT = "exact"
# largest |u| still evaluated when rounding pushes a correlation just past 1
UNIT_SLACK = 1e-12
INVERSE_EDGE = 1e-12
# pseudo coefficients occupy powers K+1 .. PSEUDO_SPAN * K
PSEUDO_SPAN = 40


@dataclasses.dataclass(frozen=True, eq=False)
class LinkTable:
    family: str
    params: tuple
    order: int
    g: np.ndarray  # g_1 .. g_K
    ell: np.ndarray  # l_1 .. l_K
    var0: float  # sum k! g_k^2
    variance: float  # Var(F_X)
    mean: float
    cutoff: int
    thresholds: np.ndarray
    l_minus1: float
    pseudo_pos: float
    pseudo_neg: float
    pseudo: bool = True

    def coefficients(self, pseudo=None) -> np.ndarray:
        """Power-series coefficients of L(u), constant term first."""
        pseudo = self.pseudo if pseudo is None else pseudo
        coefs = np.concatenate(([0.0], self.ell))
        if not pseudo:
            return coefs
        # even powers above K carry (pos + neg) / 2, odd ones (pos - neg) / 2
        even, odd = pseudo_tail_weights(self.order)
        tail = 0.5 * (self.pseudo_pos + self.pseudo_neg) * even + 0.5 * (self.pseudo_pos - self.pseudo_neg) * odd
        return np.concatenate((coefs, tail))

    @property
    def weights(self) -> np.ndarray:
        """k! g_k^2, the variance contributed by each order."""
        return self.ell * self.variance


@functools.lru_cache(maxsize=64)
def pseudo_tail_weights(order):
    """Weights spreading the pseudo mass over powers K+1 .. PSEUDO_SPAN * K.

    Each parity follows the k^(-3/2) coefficient decay and sums to one, so the
    corrected link still passes through (1, 1) and (-1, L(-1)).
    """
    powers = np.arange(order + 1, PSEUDO_SPAN * order + 1)
    decay = powers.astype(float) ** -1.5
    even = np.where(powers % 2 == 0, decay, 0.0)
    odd = np.where(powers % 2 == 1, decay, 0.0)
    even, odd = even / even.sum(), odd / odd.sum()
    even.flags.writeable = False
    odd.flags.writeable = False
    return even, odd


def hermite_eval(k, z):
    """Probabilists' Hermite polynomial H_k(z)."""
    if k < 0:
        raise ParameterDomainError(f"hermite: order must be nonnegative, got {k}")
    unit = np.zeros(k + 1)
    unit[k] = 1.0
    return hermite_e.hermeval(np.asarray(z, dtype=float), unit)[()]


def log_factorials(order):
    return gammaln(np.arange(1, order + 1) + 1.0)


def hermite_coeffs(table: CumTable, order=DEFAULT_ORDER) -> np.ndarray:
    """g_1..g_K from the cumulative table via the telescoped threshold sum."""
    if order < 1:
        raise ConfigError(f"hermite: order must be at least 1, got {order}")
    z = table.thresholds
    if len(z) == 0:
        return np.zeros(order)
    density = np.exp(-0.5 * z ** 2) / math.sqrt(2.0 * math.pi)
    # columns H_0(z) .. H_{K-1}(z)
    sums = hermite_e.hermevander(z, order - 1).T @ density
    return sums / np.exp(log_factorials(order))


def _threshold_sum(thresholds):
    return float(np.sum(np.exp(-0.25 * thresholds ** 2)))


def exact_minus_one(marginal: BaseMarginal) -> float:
    """Corr(G(Z), G(-Z)) from interval overlaps of the latent thresholds."""
    z = marginal.cum_table().thresholds
    mean, variance = marginal.moments()
    # G(Z) G(-Z) = sum_{i,j} 1{z_i < Z < -z_j}
    cross = float(np.sum(interval_prob(z[:, None], -z[None, :])))
    return float(np.clip((cross - mean ** 2) / variance, -1.0, 0.0))


def _rounded(params):
    return tuple(float(f"{p:.10g}") for p in params)


@functools.lru_cache(maxsize=4096)
def _mc_minus_one(family, params, mc_paths, seed):
    marginal = get_marginal(family, params)
    z = np.random.default_rng(seed).standard_normal(mc_paths)
    upper = marginal.latent_quantile(z).astype(float)
    lower = marginal.latent_quantile(-z).astype(float)
    if upper.std() == 0.0 or lower.std() == 0.0:
        raise DegenerateMarginalError(f"{marginal}: Monte-Carlo draws are constant")
    logger.debug(f"{marginal}: L(-1) simulated from {mc_paths} antithetic pairs")
    return float(np.corrcoef(upper, lower)[0, 1])


def correlation_bounds(marginal: BaseMarginal, mc_paths=DEFAULT_MC_PATHS, seed=0):
    """(rho_minus, rho_plus) for two variables sharing the marginal."""
    rho_minus = _mc_minus_one(marginal.family, _rounded(marginal.params), int(mc_paths), seed)
    return rho_minus, 1.0


@functools.lru_cache(maxsize=4096)
def _cached_link_table(family, params, order, pseudo, minus_one, mc_paths, seed):
    marginal = get_marginal(family, params)
    table = marginal.cum_table()
    mean, variance = marginal.moments()
    if table.cutoff == 0 or not variance > 0:
        raise DegenerateMarginalError(f"{marginal}: marginal variance is zero")

    g = hermite_coeffs(table, order)
    weights = np.exp(log_factorials(order)) * g ** 2
    var0 = float(weights.sum())
    if not var0 > 0:
        raise DegenerateMarginalError(f"{marginal}: Hermite variance is zero")
    ell = weights / variance

    if minus_one == MINUS_ONE_EXACT:
        l_minus1 = exact_minus_one(marginal)
    elif minus_one == MINUS_ONE_MC:
        l_minus1, _ = correlation_bounds(marginal, mc_paths, seed)
    else:
        raise ConfigError(f"Invalid L(-1) method: {minus_one}")

    signs = (-1.0) ** np.arange(1, order + 1)
    pseudo_pos = max(1.0 - float(ell.sum()), 0.0)
    pseudo_neg = l_minus1 - float(np.sum(ell * signs))
    logger.debug(
        f"{marginal}: link table K={order}, var0={var0:.6g}, Var={variance:.6g}, "
        f"L(-1)={l_minus1:.6g}, pseudo=({pseudo_pos:.3g}, {pseudo_neg:.3g})"
    )
    return LinkTable(
        family=family,
        params=params,
        order=order,
        g=g,
        ell=ell,
        var0=var0,
        variance=float(variance),
        mean=float(mean),
        cutoff=table.cutoff,
        thresholds=table.thresholds,
        l_minus1=l_minus1,
        pseudo_pos=pseudo_pos,
        pseudo_neg=pseudo_neg,
        pseudo=pseudo,
    )


def link_table(
    marginal: BaseMarginal,
    order=DEFAULT_ORDER,
    mc_paths=DEFAULT_MC_PATHS,
    seed=0,
    pseudo=True,
    minus_one=MINUS_ONE_MC,
) -> LinkTable:
    """Hermite and link coefficients of a marginal; tables are cached per parameter set."""
    if order < 1:
        raise ConfigError(f"link_order must be at least 1, got {order}")
    return _cached_link_table(
        marginal.family, tuple(marginal.params), int(order), bool(pseudo), minus_one, int(mc_paths), seed
    )


def _check_unit(u, closed=True):
    u = np.asarray(u, dtype=float)
    bound = 1.0 + UNIT_SLACK if closed else 1.0
    bad = np.abs(u) > bound if closed else np.abs(u) >= bound
    if np.any(bad | np.isnan(u)):
        interval = "[-1, 1]" if closed else "(-1, 1)"
        raise ParameterDomainError(f"link: correlation must lie in {interval}, got {u[bad | np.isnan(u)].ravel()[0]}")
    return np.clip(u, -1.0, 1.0)


def link_eval(table: LinkTable, u, pseudo=None):
    """L(u) = sum_k l_k u^k, including the pseudo terms unless disabled."""
    u = _check_unit(u)
    return P.polyval(u, table.coefficients(pseudo))[()]


def link_derivative(table: LinkTable, u, form="series", pseudo=None):
    """L'(u) from the differentiated series or from the bivariate normal density over the thresholds."""
    u = _check_unit(u, closed=False)
    if form == "series":
        return P.polyval(u, P.polyder(table.coefficients(pseudo)))[()]
    if form != "density":
        raise ConfigError(f"Invalid link derivative form: {form}")
    z = table.thresholds
    z0 = z[:, None, None]
    z1 = z[None, :, None]
    uu = np.atleast_1d(u)[None, None, :]
    one_minus = 1.0 - uu ** 2
    kernel = np.exp(-(z0 ** 2 + z1 ** 2 - 2.0 * uu * z0 * z1) / (2.0 * one_minus))
    out = kernel.sum(axis=(0, 1)) / (2.0 * math.pi * table.variance * np.sqrt(one_minus[0, 0]))
    return out.reshape(np.shape(u))[()]


def link_inverse(table: LinkTable, rho, pseudo=None):
    """The u with L(u) = rho, for rho inside (L(-1), 1)."""
    rho = float(rho)
    lower = float(link_eval(table, -1.0, pseudo))
    if not rho > lower:
        raise LinkRangeError(
            f"{table.family}: correlation {rho:.6g} is at or below the lower bound L(-1)={lower:.6g}"
        )
    if not rho < 1.0:
        raise LinkRangeError(f"{table.family}: correlation {rho:.6g} is at or above the upper bound 1")
    if rho == 0.0:
        return 0.0

    def gap(u):
        return float(P.polyval(u, table.coefficients(pseudo))) - rho

    a, b = -1.0 + INVERSE_EDGE, 1.0 - INVERSE_EDGE
    try:
        return brentq(gap, a, b, xtol=1e-14, rtol=1e-14, maxiter=200)
    except ValueError as e:
        raise LinkRangeError(f"{table.family}: correlation {rho:.6g} is not reachable: {e}") from e


def cross_link(table_a: LinkTable, table_b: LinkTable, u):
    """Cov(G_a(Z_0), G_b(Z_1)) for latent correlation u."""
    if table_a.order != table_b.order:
        raise ConfigError(f"cross link: truncation orders differ ({table_a.order} vs {table_b.order})")
    u = _check_unit(u)
    products = np.exp(log_factorials(table_a.order)) * table_a.g * table_b.g
    return P.polyval(u, np.concatenate(([0.0], products)))[()]


def truncation_order(marginal: BaseMarginal, eps=TRUNCATION_EPS, max_order=10_000) -> int:
    """Smallest K whose coefficient tail bound falls below eps.

    The bound on k! g_k^2 / Var is S^2 / (sqrt(2 pi^3) k^(3/2) Var) with
    S = sum_n exp(-z_n^2 / 4) over the latent thresholds.

    Poisson(1) gives K = 25. Poisson(0.01) and Poisson(0.1) both give 22, not
    the 29 and 27 usually quoted for them; the unsquared sum without the
    variance (22, 100, 533) and the squared sum (2, 5, 25) do not give those either.
    """
    thresholds = marginal.cum_table().thresholds
    _, variance = marginal.moments()
    scale = _threshold_sum(thresholds) ** 2 / (math.sqrt(2.0 * math.pi ** 3) * variance * eps)
    return int(min(math.floor(scale ** (2.0 / 3.0)) + 1, max_order))


def asymptotic_coefficients(table: LinkTable, orders) -> np.ndarray:
    """Large-k approximation of g_k sqrt(k!)."""
    orders = np.asarray(orders, dtype=float)
    z = table.thresholds[:, None]
    root = np.sqrt(orders - 1.0)[None, :]
    waves = np.exp(-0.25 * z ** 2) * np.cos(z * root - (orders[None, :] - 1.0) * math.pi / 2.0)
    return waves.sum(axis=0) / (2.0 ** 0.25 * math.pi ** 0.75 * orders ** 0.75)


def link_table_frame(table: LinkTable) -> pd.DataFrame:
    """Per-order coefficients (k, g_k, l_k) for export."""
    return pd.DataFrame(
        {
            "k": np.arange(1, table.order + 1),
            "g": table.g,
            "ell": table.ell,
        }
    )
