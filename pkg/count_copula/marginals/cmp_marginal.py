import logging
import math

import numpy as np
from scipy.special import gammaln

from count_copula.core.errors import HeavyTailError, ParameterDomainError
from count_copula.marginals.base_marginal import CMP, BaseMarginal
from count_copula.utils.transforms import POSITIVE

logger = logging.getLogger(__name__)

NORMALIZER_REL_TOL = 1e-16
NORMALIZER_MAX_TERMS = 10 ** 6
NORMALIZER_BLOCK = 4096


def log_normalizer(lam, nu, max_terms=NORMALIZER_MAX_TERMS):
    """log sum_k lam^k / (k!)^nu, stopping past the mode once a term is below 1e-16 of the running sum."""
    log_lam = math.log(lam)
    mode = lam ** (1.0 / nu)
    log_tol = math.log(NORMALIZER_REL_TOL)
    running = -np.inf
    for start in range(0, max_terms, NORMALIZER_BLOCK):
        k = np.arange(start, min(start + NORMALIZER_BLOCK, max_terms), dtype=float)
        terms = k * log_lam - nu * gammaln(k + 1.0)
        partial = np.logaddexp.accumulate(np.concatenate(([running], terms)))[1:]
        done = np.flatnonzero((k > mode) & (terms < log_tol + partial))
        if len(done):
            return float(partial[done[0]])
        running = partial[-1]
    raise HeavyTailError(f"{CMP}(lam={lam:g}, nu={nu:g}): normalizing series did not converge within {max_terms} terms")


class CMPMarginal(BaseMarginal):
    """Conway-Maxwell-Poisson: P(X=k) = lam^k / ((k!)^nu C(lam, nu))."""

    family = CMP

    @classmethod
    def layout(cls, fixed, components):
        return ["lam", "nu"], [POSITIVE, POSITIVE]

    @property
    def param_names(self):
        return ["lam", "nu"]

    @property
    def param_kinds(self):
        return [POSITIVE, POSITIVE]

    @property
    def lam(self):
        return self.params[0]

    @property
    def nu(self):
        return self.params[1]

    def validate_params(self):
        if len(self.params) != 2:
            raise ParameterDomainError(f"{CMP}: expected parameters (lam, nu), got {len(self.params)} values")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ParameterDomainError(f"{CMP}: lam must be positive, got {self.lam}")
        if not (np.isfinite(self.nu) and self.nu > 0):
            raise ParameterDomainError(f"{CMP}: nu must be positive, got {self.nu}")
        self.log_z = log_normalizer(self.lam, self.nu, self.tail_cap)

    def _size_hint(self):
        mode = self.lam ** (1.0 / self.nu)
        return int(mode + 40.0 * math.sqrt(mode / self.nu + 1.0)) + 64

    def log_pmf(self, k):
        k = np.asarray(k, dtype=float)
        kk = np.maximum(k, 0.0)
        out = kk * math.log(self.lam) - self.nu * gammaln(kk + 1.0) - self.log_z
        return np.where(k < 0, -np.inf, out)[()]

    def moments(self):
        return self.table_moments()

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        mean = max(float(np.mean(data)), 0.1)
        variance = max(float(np.var(data)), 0.1)
        nu = float(np.clip(mean / variance, 0.2, 5.0))
        lam = max(mean + (nu - 1.0) / (2.0 * nu), 0.1) ** nu
        return {"lam": lam, "nu": nu}
