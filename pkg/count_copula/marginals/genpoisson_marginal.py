import logging

import numpy as np
from scipy.special import gammaln

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import GENPOISSON, BaseMarginal
from count_copula.utils.transforms import POSITIVE, UNIT

logger = logging.getLogger(__name__)


class GenPoissonMarginal(BaseMarginal):
    """Generalized Poisson GPois(lam, eta) with eta in [0, 1).

    P(X=k) = lam (lam + eta k)^(k-1) exp(-lam - eta k) / k!. The GLM form
    (mu, alpha) has mean mu and variance mu (1 + alpha mu)^2.
    """

    family = GENPOISSON
    glm_names = ("mu", "alpha")

    @classmethod
    def layout(cls, fixed, components):
        return ["lam", "eta"], [POSITIVE, UNIT]

    @classmethod
    def from_glm(cls, mu, alpha):
        if not mu > 0:
            raise ParameterDomainError(f"{GENPOISSON}: mean must be positive, got {mu}")
        if not alpha >= 0:
            raise ParameterDomainError(f"{GENPOISSON}: alpha must be nonnegative, got {alpha}")
        scale = 1.0 + alpha * mu
        return mu / scale, alpha * mu / scale

    @property
    def param_names(self):
        return ["lam", "eta"]

    @property
    def param_kinds(self):
        return [POSITIVE, UNIT]

    @property
    def lam(self):
        return self.params[0]

    @property
    def eta(self):
        return self.params[1]

    def validate_params(self):
        if len(self.params) != 2:
            raise ParameterDomainError(f"{GENPOISSON}: expected parameters (lam, eta), got {len(self.params)} values")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ParameterDomainError(f"{GENPOISSON}: lam must be positive, got {self.lam}")
        if not 0 <= self.eta < 1:
            raise ParameterDomainError(f"{GENPOISSON}: eta must lie in [0, 1), got {self.eta}")

    def log_pmf(self, k):
        k = np.asarray(k, dtype=float)
        kk = np.maximum(k, 0.0)
        out = (
            np.log(self.lam)
            + (kk - 1.0) * np.log(self.lam + self.eta * kk)
            - self.lam
            - self.eta * kk
            - gammaln(kk + 1.0)
        )
        return np.where(k < 0, -np.inf, out)[()]

    def moments(self):
        spread = 1.0 - self.eta
        return self.lam / spread, self.lam / spread ** 3

    def glm_parameters(self):
        return self.lam / (1.0 - self.eta), self.eta / self.lam

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        mean = max(float(np.mean(data)), 0.1)
        variance = float(np.var(data))
        eta = 1.0 - np.sqrt(mean / variance) if variance > mean * 1.01 else 0.05
        eta = float(np.clip(eta, 0.01, 0.9))
        return {"lam": mean * (1.0 - eta), "eta": eta}
