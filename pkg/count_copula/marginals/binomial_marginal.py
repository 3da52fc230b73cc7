import logging

import numpy as np
from scipy.stats import binom

from count_copula.core.errors import ConfigError, ParameterDomainError
from count_copula.marginals.base_marginal import BINOMIAL, BaseMarginal
from count_copula.utils.transforms import FIXED, UNIT

logger = logging.getLogger(__name__)


class BinomialMarginal(BaseMarginal):
    family = BINOMIAL
    glm_names = ("mu", "n")

    @classmethod
    def layout(cls, fixed, components):
        if "n" not in fixed:
            raise ConfigError(f"{BINOMIAL}: the number of trials must be given as fixed.n")
        return ["n", "p"], [FIXED, UNIT]

    @classmethod
    def from_glm(cls, mu, n):
        if not (0 < mu < n):
            raise ParameterDomainError(f"{BINOMIAL}: mean must lie in (0, n={n:g}), got {mu}")
        return n, mu / n

    @property
    def param_names(self):
        return ["n", "p"]

    @property
    def param_kinds(self):
        return [FIXED, UNIT]

    @property
    def n(self):
        return int(self.params[0])

    @property
    def p(self):
        return self.params[1]

    def validate_params(self):
        if len(self.params) != 2:
            raise ParameterDomainError(f"{BINOMIAL}: expected parameters (n, p), got {len(self.params)} values")
        n = self.params[0]
        if not (n >= 1 and n == int(n)):
            raise ParameterDomainError(f"{BINOMIAL}: n must be a positive integer, got {n}")
        if not 0 < self.p < 1:
            raise ParameterDomainError(f"{BINOMIAL}: p must lie in (0, 1), got {self.p}")

    def _support_max(self):
        return self.n

    def log_pmf(self, k):
        return binom.logpmf(k, self.n, self.p)

    def moments(self):
        return self.n * self.p, self.n * self.p * (1.0 - self.p)

    def glm_parameters(self):
        return self.n * self.p, float(self.n)

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        n = float(fixed["n"])
        p = float(np.clip(np.mean(data) / n, 0.01, 0.99))
        return {"n": n, "p": p}
