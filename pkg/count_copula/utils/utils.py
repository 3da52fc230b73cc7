import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import log_ndtr, ndtri

from count_copula.core.errors import DataError

logger = logging.getLogger(__name__)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
CSV_FLOAT_FORMAT = "%.12g"


def log_interval_prob(lower, upper):
    """log(Phi(upper) - Phi(lower)), accurate in both tails.

    Intervals lying in the upper half line are mirrored so the difference is
    always taken between lower-tail log-CDF values.
    """
    lower, upper = np.broadcast_arrays(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
    flip = lower > 0
    lo = np.where(flip, -upper, lower)
    hi = np.where(flip, -lower, upper)
    log_hi = log_ndtr(hi)
    log_lo = log_ndtr(lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_hi + np.log1p(-np.exp(log_lo - log_hi))
    out = np.where((log_hi == -np.inf) | (lo >= hi), -np.inf, out)
    return out[()]


def interval_prob(lower, upper):
    return np.exp(log_interval_prob(lower, upper))


def latent_thresholds(cdf, sf):
    """Phi^{-1}(C_n), using the survival function where C_n > 1/2."""
    cdf = np.asarray(cdf, dtype=float)
    sf = np.asarray(sf, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(cdf <= 0.5, ndtri(cdf), -ndtri(sf))


def read_counts(path, column=None):
    """Read a count column from a CSV file, validating every row."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    frame = pd.read_csv(path)
    if frame.empty:
        raise DataError(f"{path}: no data rows")
    if column is None:
        column = "x" if "x" in frame.columns else frame.columns[-1]
    if column not in frame.columns:
        raise DataError(f"{path}: column '{column}' not found, available: {list(frame.columns)}")

    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
    for row, value in enumerate(values):
        # header is line 1
        if not np.isfinite(value) or value < 0 or value != math.floor(value):
            raise DataError(
                f"{path}:{row + 2}: column '{column}' value {frame[column].iloc[row]!r} is not a nonnegative integer"
            )
    logger.debug(f"Read {len(values)} counts from {path} (column {column})")
    return values.astype(np.int64)


def read_covariates(path, columns):
    path = Path(path)
    if not path.exists():
        raise DataError(f"covariates file not found: {path}")
    frame = pd.read_csv(path)
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise DataError(f"{path}: covariate columns {missing} not found")
    matrix = frame[list(columns)].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
    bad_rows = np.where(~np.isfinite(matrix).all(axis=1))[0]
    if len(bad_rows):
        raise DataError(f"{path}:{bad_rows[0] + 2}: non-numeric covariate value")
    return matrix.reshape(len(frame), len(columns))


def write_csv(frame: pd.DataFrame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _json_default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(payload, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from e
