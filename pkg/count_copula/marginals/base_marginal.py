import dataclasses
import functools
import logging
import math
import threading
from typing import List, Sequence

import numpy as np

from count_copula.core.errors import ConfigError, HeavyTailError, ParameterDomainError
from count_copula.utils.transforms import FIXED
from count_copula.utils.utils import latent_thresholds

logger = logging.getLogger(__name__)

BINOMIAL = "binomial"
POISSON = "poisson"
MIXPOISSON = "mixpoisson"
NEGBINOMIAL = "negbinomial"
GENPOISSON = "genpoisson"
CMP = "cmp"

DEFAULT_TAIL_CAP = 10 ** 6
# the pmf grid stops once the last mass drops below exp(-92) ~ 1e-40
TAIL_LOG_EPS = -92.0
# guards grid replacement on instances shared through get_marginal
_GRID_LOCK = threading.Lock()


@dataclasses.dataclass(frozen=True)
class CumTable:
    probs: np.ndarray  # p_0 .. p_{n-1}
    cums: np.ndarray  # C_0 .. C_{n-1}
    tails: np.ndarray  # P(X > n), n < cutoff
    cutoff: int  # first n with C_n == 1.0

    @property
    def thresholds(self) -> np.ndarray:
        """Phi^{-1}(C_n) for n < cutoff; all finite."""
        return latent_thresholds(self.cums, self.tails)

    def __len__(self):
        return self.cutoff


@dataclasses.dataclass(frozen=True)
class _PmfGrid:
    pmf: np.ndarray
    cdf: np.ndarray
    sf: np.ndarray
    thresholds: np.ndarray
    cutoff: int


class BaseMarginal:
    family = None
    glm_names = ()

    def __init__(self, params, tail_cap=DEFAULT_TAIL_CAP):
        if isinstance(params, dict):
            params = self.params_from_dict(params)
        self.params = tuple(float(p) for p in np.atleast_1d(np.asarray(params, dtype=float)))
        self.tail_cap = tail_cap
        self._grid = None
        self.validate_params()

    def __str__(self) -> str:
        values = ", ".join(f"{name}={value:g}" for name, value in zip(self.param_names, self.params))
        return f"{self.family}({values})"

    def __repr__(self) -> str:
        return str(self)

    # family specific
    @property
    def param_names(self) -> List[str]:
        raise NotImplementedError

    @property
    def param_kinds(self) -> List[str]:
        raise NotImplementedError

    def validate_params(self):
        raise NotImplementedError

    def log_pmf(self, k):
        raise NotImplementedError

    def moments(self):
        raise NotImplementedError

    def glm_parameters(self):
        raise ConfigError(f"{self.family}: no GLM parametrization")

    @classmethod
    def layout(cls, fixed: dict, components: int):
        """(names, kinds) of the canonical parameters."""
        raise NotImplementedError

    @classmethod
    def from_glm(cls, mean, *dispersion):
        raise ConfigError(f"{cls.family}: no GLM parametrization")

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2) -> dict:
        """Method-of-moments starting values keyed by parameter name."""
        raise NotImplementedError

    def _size_hint(self) -> int:
        mean, variance = self.moments()
        return int(mean + 40.0 * math.sqrt(variance)) + 64

    def _support_max(self):
        return None

    # shared
    def params_from_dict(self, params: dict):
        names = self.names_for(params)
        missing = [name for name in names if name not in params]
        if missing:
            raise ConfigError(f"{self.family}: missing parameters {missing}")
        unknown = [name for name in params if name not in names]
        if unknown:
            raise ConfigError(f"{self.family}: unknown parameters {unknown}")
        return [params[name] for name in names]

    def names_for(self, params: dict) -> List[str]:
        return self.param_names

    def as_dict(self) -> dict:
        return dict(zip(self.param_names, self.params))

    def estimable_names(self) -> List[str]:
        return [name for name, kind in zip(self.param_names, self.param_kinds) if kind != FIXED]

    def pmf(self, k):
        return np.exp(self.log_pmf(k))

    def cdf(self, k):
        """P(X <= k)."""
        k = np.asarray(k)
        grid = self._grid_for(np.max(k, initial=0))
        idx = np.clip(k, 0, len(grid.cdf) - 1).astype(np.int64)
        return np.where(k < 0, 0.0, grid.cdf[idx])[()]

    def sf(self, k):
        """P(X > k)."""
        k = np.asarray(k)
        grid = self._grid_for(np.max(k, initial=0))
        idx = np.clip(k, 0, len(grid.sf) - 1).astype(np.int64)
        return np.where(k < 0, 1.0, grid.sf[idx])[()]

    def quantile(self, u):
        """Smallest k with C_k >= u."""
        u = np.asarray(u, dtype=float)
        if np.any(~((u > 0.0) & (u < 1.0))):
            raise ParameterDomainError(f"{self.family}: quantile level must lie in (0, 1)")
        grid = self._grid_for(0)
        return np.searchsorted(grid.cdf, u, side="left")[()]

    def latent_quantile(self, z):
        """G(z) = quantile(Phi(z)) evaluated through the latent thresholds."""
        grid = self._grid_for(0)
        return np.searchsorted(grid.thresholds, np.asarray(z, dtype=float), side="left")[()]

    def latent_bounds(self, x):
        """(Phi^{-1}(C_{x-1}), Phi^{-1}(C_x)); x = 0 has lower bound -inf."""
        x = np.asarray(x, dtype=np.int64)
        grid = self._grid_for(np.max(x, initial=0) + 1)
        upper = grid.thresholds[np.clip(x, 0, len(grid.thresholds) - 1)]
        lower = np.where(x > 0, grid.thresholds[np.clip(x - 1, 0, len(grid.thresholds) - 1)], -np.inf)
        return lower[()], upper[()]

    def cum_table(self) -> CumTable:
        grid = self._grid_for(0)
        n = grid.cutoff
        return CumTable(
            probs=grid.pmf[:n].copy(),
            cums=grid.cdf[:n].copy(),
            tails=grid.sf[:n].copy(),
            cutoff=n,
        )

    def table_moments(self):
        grid = self._grid_for(0)
        k = np.arange(len(grid.pmf))
        mean = float(np.sum(k * grid.pmf))
        variance = float(np.sum((k - mean) ** 2 * grid.pmf))
        return mean, variance

    def _grid_for(self, max_count) -> _PmfGrid:
        """A grid covering ``max_count``; grids are never modified, a longer one replaces the old under a lock."""
        grid = self._grid
        if grid is not None and not self._needs_growth(grid, max_count):
            return grid
        with _GRID_LOCK:
            grid = self._grid
            if grid is None or self._needs_growth(grid, max_count):
                grid = self._build_grid(int(max_count) + 1)
                self._grid = grid
        return grid

    def _needs_growth(self, grid, max_count) -> bool:
        return max_count >= len(grid.pmf) and len(grid.pmf) < self.tail_cap

    def _build_grid(self, min_size) -> _PmfGrid:
        support_max = self._support_max()
        if support_max is not None:
            size = max(support_max + 1, min_size)
        else:
            size = max(self._size_hint(), min_size)

        size = min(size, self.tail_cap)
        while True:
            log_p = np.asarray(self.log_pmf(np.arange(size)), dtype=float)
            if support_max is not None:
                break
            if size > 1 and log_p[-1] < TAIL_LOG_EPS and log_p[-1] <= log_p[-2]:
                break
            if size >= self.tail_cap:
                raise HeavyTailError(
                    f"{self}: probability mass not exhausted within {self.tail_cap} counts"
                )
            size = min(2 * size, self.tail_cap)

        pmf = np.exp(log_p)
        forward = np.cumsum(pmf)
        # upper tail summed from the far end keeps P(X > k) accurate past the cutoff
        sf = np.append(np.cumsum(pmf[::-1])[::-1][1:], 0.0)
        cdf = np.maximum.accumulate(np.where(forward <= 0.5, forward, 1.0 - sf))
        cdf = np.minimum(cdf, 1.0)

        at_one = np.flatnonzero(cdf >= 1.0)
        if len(at_one) == 0:
            raise HeavyTailError(f"{self}: cumulative probabilities never reach 1")
        cutoff = int(at_one[0])
        thresholds = latent_thresholds(cdf, sf)
        for values in (pmf, cdf, sf, thresholds):
            values.flags.writeable = False
        logger.debug(f"{self}: pmf grid of {size} counts, cutoff n={cutoff}")
        return _PmfGrid(pmf=pmf, cdf=cdf, sf=sf, thresholds=thresholds, cutoff=cutoff)


# Common support methods for all marginal families
def get_supported_marginals() -> List[str]:
    return [POISSON, NEGBINOMIAL, GENPOISSON, MIXPOISSON, BINOMIAL, CMP]


def get_glm_families() -> List[str]:
    return [POISSON, NEGBINOMIAL, GENPOISSON, BINOMIAL]


def marginal_class(family):
    if family == POISSON:
        from count_copula.marginals.poisson_marginal import PoissonMarginal

        return PoissonMarginal
    elif family == NEGBINOMIAL:
        from count_copula.marginals.negbinomial_marginal import NegBinomialMarginal

        return NegBinomialMarginal
    elif family == GENPOISSON:
        from count_copula.marginals.genpoisson_marginal import GenPoissonMarginal

        return GenPoissonMarginal
    elif family == MIXPOISSON:
        from count_copula.marginals.mixpoisson_marginal import MixPoissonMarginal

        return MixPoissonMarginal
    elif family == BINOMIAL:
        from count_copula.marginals.binomial_marginal import BinomialMarginal

        return BinomialMarginal
    elif family == CMP:
        from count_copula.marginals.cmp_marginal import CMPMarginal

        return CMPMarginal
    else:
        raise ConfigError(f"Invalid marginal family: {family}")


@functools.lru_cache(maxsize=4096)
def _cached_marginal(family, params):
    return marginal_class(family)(params)


def get_marginal(family, params) -> BaseMarginal:
    """Marginal for ``family``; identical (family, params) share one instance."""
    if isinstance(params, dict):
        params = marginal_class(family)(params).params
    params = tuple(float(p) for p in np.atleast_1d(np.asarray(params, dtype=float)))
    return _cached_marginal(family, params)


def param_layout(family, fixed=None, components=2):
    """(names, kinds) of a family's canonical parameters before any values exist."""
    cls = marginal_class(family)
    return cls.layout(fixed or {}, components)


def reparametrize(family, glm_params: Sequence[float]) -> BaseMarginal:
    """Canonical marginal from GLM-style parameters (mean first, then dispersion)."""
    cls = marginal_class(family)
    if family not in get_glm_families():
        raise ConfigError(f"{family}: no GLM parametrization")
    return get_marginal(family, cls.from_glm(*glm_params))
