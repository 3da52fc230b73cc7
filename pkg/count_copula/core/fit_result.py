import dataclasses
import logging
import math
from typing import Dict, List, Optional

import numpy as np

from count_copula.core.errors import ConfigError

logger = logging.getLogger(__name__)

GL = "gl"
IYW = "iyw"
PF = "pf"


def information_criteria(loglik, n_params, n_obs):
    """(aic, aicc, bic) for a fit on ``n_obs`` = T+1 observations."""
    aic = -2.0 * loglik + 2.0 * n_params
    denominator = (n_obs - 1) - n_params
    aicc = aic + 2.0 * n_params * (n_params + 1) / denominator if denominator > 0 else math.inf
    bic = -2.0 * loglik + n_params * math.log(n_obs)
    return aic, aicc, bic


def model_label(ar_order, ma_order) -> str:
    if ar_order == 0 and ma_order == 0:
        return "WN"
    if ma_order == 0:
        return f"AR({ar_order})"
    if ar_order == 0:
        return f"MA({ma_order})"
    return f"ARMA({ar_order},{ma_order})"


@dataclasses.dataclass
class FitResult:
    method: str
    family: str
    estimates: Dict[str, float]
    ar_order: int = 0
    ma_order: int = 0
    n_obs: int = 0
    fixed: Dict[str, float] = dataclasses.field(default_factory=dict)
    components: int = 2
    linked_param: str = "mean"
    covariate_columns: Optional[List[str]] = None
    loglik: Optional[float] = None
    std_errors: Optional[Dict[str, float]] = None
    aic: Optional[float] = None
    aicc: Optional[float] = None
    bic: Optional[float] = None
    convergence: dict = dataclasses.field(default_factory=dict)
    flags: List[str] = dataclasses.field(default_factory=list)
    seed: Optional[int] = None
    particles: Optional[int] = None
    filter_name: Optional[str] = None
    link_order: Optional[int] = None

    def __post_init__(self):
        if self.method not in (GL, IYW, PF):
            raise ConfigError(f"fit: unknown method '{self.method}'")
        if self.loglik is not None and self.aic is None:
            self.aic, self.aicc, self.bic = information_criteria(self.loglik, self.n_params, self.n_obs)

    def __str__(self) -> str:
        values = ", ".join(f"{name}={value:.6g}" for name, value in self.estimates.items())
        loglik = "n/a" if self.loglik is None else f"{self.loglik:.4f}"
        return f"{self.method.upper()} {self.family}-{self.model} [{values}] loglik={loglik}"

    @property
    def model(self) -> str:
        return model_label(self.ar_order, self.ma_order)

    @property
    def n_params(self) -> int:
        return len(self.estimates)

    @property
    def ar(self) -> tuple:
        return tuple(self.estimates[f"ar_{i}"] for i in range(1, self.ar_order + 1))

    @property
    def ma(self) -> tuple:
        return tuple(self.estimates[f"ma_{i}"] for i in range(1, self.ma_order + 1))

    def parameter_space(self, covariates=None):
        from count_copula.estimators.base_estimator import ParameterSpace

        if self.covariate_columns and covariates is None:
            raise ConfigError(f"fit: covariates {self.covariate_columns} are needed to rebuild this model")
        return ParameterSpace(
            self.family,
            ar_order=self.ar_order,
            ma_order=self.ma_order,
            fixed=self.fixed,
            components=self.components,
            covariates=covariates if self.covariate_columns else None,
            linked_param=self.linked_param,
        )

    def assemble(self, covariates=None):
        """(marginal or regression spec, latent model) at the estimates."""
        return self.parameter_space(covariates).assemble(self.estimates)

    def summary_row(self) -> dict:
        return {
            "method": self.method,
            "family": self.family,
            "model": self.model,
            "n_params": self.n_params,
            "loglik": self.loglik,
            "aic": self.aic,
            "aicc": self.aicc,
            "bic": self.bic,
            "converged": self.convergence.get("success"),
        }

    def to_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        for key in ("aic", "aicc", "bic"):
            if payload[key] is not None and not math.isfinite(payload[key]):
                payload[key] = None
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "FitResult":
        names = {field.name for field in dataclasses.fields(cls)}
        unknown = sorted(set(payload) - names)
        if unknown:
            raise ConfigError(f"fit: unknown keys {unknown}")
        for key in ("method", "family", "estimates"):
            if key not in payload:
                raise ConfigError(f"fit: missing key '{key}'")
        payload = dict(payload)
        payload["estimates"] = {name: float(value) for name, value in payload["estimates"].items()}
        if payload.get("std_errors") is not None:
            payload["std_errors"] = {name: float(value) for name, value in payload["std_errors"].items()}
        return cls(**payload)


def as_float_dict(names, values) -> Dict[str, float]:
    return {name: float(value) for name, value in zip(names, np.asarray(values, dtype=float))}
