import logging
import re

import numpy as np
from scipy.special import logsumexp
from scipy.stats import poisson

from count_copula.core.errors import ConfigError, ParameterDomainError
from count_copula.marginals.base_marginal import MIXPOISSON, BaseMarginal
from count_copula.utils.transforms import HALF_UNIT, POSITIVE, UNIT

logger = logging.getLogger(__name__)

_LAM_KEY = re.compile(r"^lam_(\d+)$")


def _names(components):
    return [f"lam_{m}" for m in range(1, components + 1)] + [f"p_{m}" for m in range(1, components)]


def _kinds(components):
    # two components are identified by keeping the first weight below 1/2
    weight_kind = HALF_UNIT if components == 2 else UNIT
    return [POSITIVE] * components + [weight_kind] * (components - 1)


class MixPoissonMarginal(BaseMarginal):
    """Finite Poisson mixture with rates lam_1..lam_M and weights p_1..p_{M-1}.

    The last weight is implied: p_M = 1 - sum of the others.
    """

    family = MIXPOISSON

    @classmethod
    def layout(cls, fixed, components):
        if components < 1:
            raise ConfigError(f"{MIXPOISSON}: components must be at least 1, got {components}")
        return _names(components), _kinds(components)

    @property
    def components(self):
        return (len(self.params) + 1) // 2

    @property
    def param_names(self):
        return _names(self.components)

    @property
    def param_kinds(self):
        return _kinds(self.components)

    @property
    def rates(self):
        return np.asarray(self.params[: self.components])

    @property
    def weights(self):
        head = np.asarray(self.params[self.components:])
        return np.append(head, 1.0 - head.sum())

    def names_for(self, params: dict):
        components = sum(1 for key in params if _LAM_KEY.match(key))
        return _names(components)

    def validate_params(self):
        if len(self.params) % 2 == 0:
            raise ParameterDomainError(
                f"{MIXPOISSON}: expected 2M-1 parameters (M rates, M-1 weights), got {len(self.params)}"
            )
        rates = self.rates
        if not np.all(np.isfinite(rates) & (rates > 0)):
            raise ParameterDomainError(f"{MIXPOISSON}: all rates must be positive, got {rates.tolist()}")
        weights = self.weights
        if not np.all(weights > 0):
            raise ParameterDomainError(
                f"{MIXPOISSON}: weights must be positive and sum to 1, got {weights.tolist()}"
            )

    def log_pmf(self, k):
        k = np.asarray(k)
        terms = poisson.logpmf(k[..., None], self.rates) + np.log(self.weights)
        return logsumexp(terms, axis=-1)[()]

    def moments(self):
        rates, weights = self.rates, self.weights
        mean = float(np.sum(weights * rates))
        second = float(np.sum(weights * (rates + rates ** 2)))
        return mean, second - mean ** 2

    @classmethod
    def initial_guess(cls, data, fixed=None, components=2):
        data = np.sort(np.asarray(data, dtype=float))
        if components == 1:
            return {"lam_1": max(float(data.mean()), 0.1)}
        if components == 2:
            lower = data <= data.mean()
            groups = [data[lower], data[~lower]] if lower.any() and (~lower).any() else np.array_split(data, 2)
            # the smaller group becomes the first component so p_1 < 1/2
            groups = sorted(groups, key=len)
            share = float(np.clip(len(groups[0]) / len(data), 0.05, 0.45))
            guess = {"lam_1": groups[0].mean(), "lam_2": groups[1].mean(), "p_1": share}
        else:
            groups = np.array_split(data, components)
            guess = {f"lam_{m + 1}": group.mean() for m, group in enumerate(groups)}
            guess.update({f"p_{m}": 1.0 / components for m in range(1, components)})
        for m in range(1, components + 1):
            guess[f"lam_{m}"] = max(float(guess[f"lam_{m}"]), 0.1)
        return guess
