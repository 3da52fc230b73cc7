import logging

import numpy as np
from scipy.stats import poisson

from count_copula.core.errors import ParameterDomainError
from count_copula.marginals.base_marginal import POISSON, BaseMarginal
from count_copula.utils.transforms import POSITIVE

logger = logging.getLogger(__name__)


class PoissonMarginal(BaseMarginal):
    family = POISSON
    glm_names = ("mu",)

    @classmethod
    def layout(cls, fixed, components):
        return ["lam"], [POSITIVE]

    @classmethod
    def from_glm(cls, mu):
        if not mu > 0:
            raise ParameterDomainError(f"{POISSON}: mean must be positive, got {mu}")
        return (mu,)

    @property
    def param_names(self):
        return ["lam"]

    @property
    def param_kinds(self):
        return [POSITIVE]

    @property
    def lam(self):
        return self.params[0]

    def validate_params(self):
        if len(self.params) != 1:
            raise ParameterDomainError(f"{POISSON}: expected 1 parameter, got {len(self.params)}")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ParameterDomainError(f"{POISSON}: lam must be positive, got {self.lam}")

    def log_pmf(self, k):
        return poisson.logpmf(k, self.lam)

    def moments(self):
        return self.lam, self.lam

    def glm_parameters(self):
        return (self.lam,)

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        return {"lam": max(float(np.mean(data)), 0.1)}
