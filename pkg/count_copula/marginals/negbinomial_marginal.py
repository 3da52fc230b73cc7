import logging

import numpy as np
from scipy.stats import nbinom

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import NEGBINOMIAL, BaseMarginal
from count_copula.utils.transforms import POSITIVE, UNIT

logger = logging.getLogger(__name__)

# method-of-moments start when the sample is not overdispersed
EQUIDISPERSED_R = 100.0


class NegBinomialMarginal(BaseMarginal):
    """NB(r, p): P(X=k) = Gamma(k+r) / (k! Gamma(r)) p^k (1-p)^r.

    The GLM form is (mu, k) with mu = pr/(1-p) and overdispersion k = 1/r.
    """

    family = NEGBINOMIAL
    glm_names = ("mu", "k")

    @classmethod
    def layout(cls, fixed, components):
        return ["r", "p"], [POSITIVE, UNIT]

    @classmethod
    def from_glm(cls, mu, k):
        if not mu > 0:
            raise ParameterDomainError(f"{NEGBINOMIAL}: mean must be positive, got {mu}")
        if not k > 0:
            raise ParameterDomainError(f"{NEGBINOMIAL}: overdispersion k must be positive, got {k}")
        r = 1.0 / k
        return r, mu / (mu + r)

    @property
    def param_names(self):
        return ["r", "p"]

    @property
    def param_kinds(self):
        return [POSITIVE, UNIT]

    @property
    def r(self):
        return self.params[0]

    @property
    def p(self):
        return self.params[1]

    def validate_params(self):
        if len(self.params) != 2:
            raise ParameterDomainError(f"{NEGBINOMIAL}: expected parameters (r, p), got {len(self.params)} values")
        if not (np.isfinite(self.r) and self.r > 0):
            raise ParameterDomainError(f"{NEGBINOMIAL}: r must be positive, got {self.r}")
        if not 0 < self.p < 1:
            raise ParameterDomainError(f"{NEGBINOMIAL}: p must lie in (0, 1), got {self.p}")

    def log_pmf(self, k):
        # scipy counts failures before the r-th success, with success probability 1 - p
        return nbinom.logpmf(k, self.r, 1.0 - self.p)

    def moments(self):
        mean = self.p * self.r / (1.0 - self.p)
        return mean, mean / (1.0 - self.p)

    def glm_parameters(self):
        mean, _ = self.moments()
        return mean, 1.0 / self.r

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        mean = max(float(np.mean(data)), 0.1)
        variance = float(np.var(data))
        if variance > mean * 1.01:
            r = mean ** 2 / (variance - mean)
        else:
            r = EQUIDISPERSED_R
        return {"r": r, "p": mean / (mean + r)}
