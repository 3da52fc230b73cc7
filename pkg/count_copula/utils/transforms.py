import numpy as np
from scipy.special import expit, logit
from statsmodels.tsa.statespace.tools import (
    constrain_stationary_univariate,
    unconstrain_stationary_univariate,
)

POSITIVE = "positive"
UNIT = "unit"
HALF_UNIT = "half_unit"
REAL = "real"
FIXED = "fixed"


def to_unconstrained(value, kind):
    if kind == POSITIVE:
        return np.log(value)
    if kind == UNIT:
        return logit(value)
    if kind == HALF_UNIT:
        return logit(2.0 * value)
    if kind == REAL:
        return value
    raise ValueError(f"Invalid parameter kind: {kind}")


def to_constrained(value, kind):
    if kind == POSITIVE:
        return np.exp(value)
    if kind == UNIT:
        return expit(value)
    if kind == HALF_UNIT:
        return 0.5 * expit(value)
    if kind == REAL:
        return value
    raise ValueError(f"Invalid parameter kind: {kind}")


# AR polynomial 1 - phi_1 z - ... ; MA polynomial 1 + theta_1 z + ...
def constrain_ar(unconstrained):
    unconstrained = np.asarray(unconstrained, dtype=float)
    if unconstrained.size == 0:
        return unconstrained
    return constrain_stationary_univariate(unconstrained)


def unconstrain_ar(ar):
    ar = np.asarray(ar, dtype=float)
    if ar.size == 0:
        return ar
    return unconstrain_stationary_univariate(ar)


def constrain_ma(unconstrained):
    return -constrain_ar(unconstrained)


def unconstrain_ma(ma):
    return unconstrain_ar(-np.asarray(ma, dtype=float))
