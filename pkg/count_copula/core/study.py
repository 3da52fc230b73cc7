import dataclasses
import logging
import multiprocessing
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from count_copula.core.errors import ConfigError, CountCopulaError
from count_copula.core.fit_result import IYW, PF
from count_copula.core.latent_gaussian import LatentModel
from count_copula.core.sampler import simulate_counts
from count_copula.estimators.base_estimator import ParameterSpace, get_estimator
from count_copula.estimators.pf_estimator import CRN_MODE, DEFAULT_GLOBAL_GENERATIONS
from count_copula.marginals.base_marginal import get_marginal
from count_copula.particle_filters.base_particle_filter import DEFAULT_ESS_THRESHOLD, DEFAULT_PARTICLES, SISR
from count_copula.utils.log_handler import setup_logging

logger = logging.getLogger(__name__)

COLUMNS = ["length", "replication", "estimator", "particles", "fit", "parameter", "true_value", "estimate"]
# fit index of the primary fit; repeated PF fits count from 1
PRIMARY_FIT = 0


@dataclasses.dataclass(frozen=True)
class ReplicationScheme:
    """One simulation design: a stationary marginal, a latent ARMA model and the estimators to compare."""

    family: str
    params: Dict[str, float]
    ar: Tuple[float, ...] = ()
    ma: Tuple[float, ...] = ()
    fixed: Dict[str, float] = dataclasses.field(default_factory=dict)
    components: int = 2
    estimators: Tuple[str, ...] = ("gl", "iyw", "pf")
    lengths: Tuple[int, ...] = (100, 200, 400)
    replications: int = 200
    seed: int = 0
    particles: int = DEFAULT_PARTICLES
    filter_name: str = SISR
    ess_threshold: float = DEFAULT_ESS_THRESHOLD
    optimizer_mode: str = CRN_MODE
    global_generations: int = DEFAULT_GLOBAL_GENERATIONS
    restarts: int = 3
    link_order: int = 25
    repeated_fits: int = 0
    repeat_particles: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError(f"study: replications must be at least 1, got {self.replications}")
        if any(length < 2 for length in self.lengths):
            raise ConfigError(f"study: series lengths must be at least 2, got {list(self.lengths)}")
        if IYW in self.estimators and self.ma:
            raise ConfigError("study: iyw cannot fit the MA part of this scheme, drop it from estimators")
        if self.repeated_fits and not self.repeat_particles:
            raise ConfigError("study: repeated fits need at least one particle count")
        # fails early on invalid true parameters
        self.marginal()
        self.model()

    def marginal(self):
        return get_marginal(self.family, {**self.fixed, **self.params})

    def model(self) -> LatentModel:
        return LatentModel(ar=tuple(self.ar), ma=tuple(self.ma))

    def space(self) -> ParameterSpace:
        return ParameterSpace(self.family, len(self.ar), len(self.ma), fixed=self.fixed, components=self.components)

    def true_values(self) -> Dict[str, float]:
        values = {**self.params}
        values.update({f"ar_{i}": value for i, value in enumerate(self.ar, start=1)})
        values.update({f"ma_{i}": value for i, value in enumerate(self.ma, start=1)})
        return {name: float(values[name]) for name in self.space().names}

    def estimator_options(self, name, particles=None, seed=0) -> dict:
        options = {"restarts": self.restarts, "link_order": self.link_order, "std_errors": False}
        if name == PF:
            options.update(
                particles=particles or self.particles,
                filter_name=self.filter_name,
                ess_threshold=self.ess_threshold,
                seed=seed,
                optimizer_mode=self.optimizer_mode,
                global_generations=self.global_generations,
            )
        return options

    def tasks(self) -> List[Tuple["ReplicationScheme", int, int]]:
        return [(self, int(length), r) for length in self.lengths for r in range(self.replications)]


def replication_rng(seed, length, replication) -> np.random.Generator:
    """Generator for one (length, replication) cell, independent of how many cells run."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(length), int(replication))))


def run_replication(scheme: ReplicationScheme, length, replication) -> List[dict]:
    """Simulate one series of ``length`` observations and fit it with every estimator of the scheme."""
    rng = replication_rng(scheme.seed, length, replication)
    data = simulate_counts(scheme.marginal(), scheme.model(), length - 1, rng)
    filter_seeds = rng.integers(2 ** 31, size=1 + scheme.repeated_fits * len(scheme.repeat_particles))
    truth = scheme.true_values()
    space = scheme.space()
    rows = []

    def add_rows(name, fit, particles, fit_index):
        for parameter, estimate in fit.estimates.items():
            rows.append(
                {
                    "length": int(length),
                    "replication": int(replication),
                    "estimator": name,
                    "particles": particles,
                    "fit": fit_index,
                    "parameter": parameter,
                    "true_value": truth[parameter],
                    "estimate": estimate,
                }
            )

    for name in scheme.estimators:
        try:
            options = scheme.estimator_options(name, seed=int(filter_seeds[0]))
            fit = get_estimator(name, space, **options).fit(data)
        except CountCopulaError as e:
            logger.warning(f"Replication (T={length}, r={replication}) {name} failed: {e}")
            continue
        add_rows(name, fit, options.get("particles", 0), PRIMARY_FIT)

    fit_index = PRIMARY_FIT
    for particles in scheme.repeat_particles if scheme.repeated_fits else ():
        for _ in range(scheme.repeated_fits):
            fit_index += 1
            options = scheme.estimator_options(PF, particles=particles, seed=int(filter_seeds[fit_index]))
            try:
                fit = get_estimator(PF, space, **options).fit(data)
            except CountCopulaError as e:
                logger.warning(f"Replication (T={length}, r={replication}) repeated PF fit with N={particles} failed: {e}")
                continue
            add_rows(PF, fit, particles, fit_index)
    logger.debug(f"Replication (T={length}, r={replication}) done, {len(rows)} rows")
    return rows


def _run_task(task) -> List[dict]:
    scheme, length, replication = task
    try:
        return run_replication(scheme, length, replication)
    except Exception:
        logger.exception(f"Replication (T={length}, r={replication}) failed")
        return []


def run_study(scheme: ReplicationScheme, threads=1, log_level="INFO", log_file=None) -> pd.DataFrame:
    """Long-format table of estimates over lengths x replications x estimators.

    Rows are sorted, so the table does not depend on ``threads``.
    """
    tasks = scheme.tasks()
    logger.info(
        f"Replication study: {scheme.family} {scheme.model()}, lengths {list(scheme.lengths)}, "
        f"{scheme.replications} replications, estimators {list(scheme.estimators)}, {threads} worker(s)"
    )
    rows = []
    if threads > 1:
        with multiprocessing.Pool(
            processes=threads, initializer=setup_logging, initargs=(log_level, log_file, True)
        ) as pool:
            for task_rows in pool.imap_unordered(_run_task, tasks):
                rows.extend(task_rows)
    else:
        for task in tasks:
            rows.extend(_run_task(task))

    frame = pd.DataFrame(rows, columns=COLUMNS)
    frame = frame.sort_values(["length", "replication", "estimator", "fit", "parameter"], kind="mergesort")
    frame = frame.reset_index(drop=True)

    primary = frame[frame["fit"] == PRIMARY_FIT]
    for length in scheme.lengths:
        for estimator in scheme.estimators:
            cell = primary[(primary["length"] == length) & (primary["estimator"] == estimator)]
            done = cell["replication"].nunique()
            if done < scheme.replications:
                logger.warning(f"Replication study: {estimator} at T={length} has {done} of {scheme.replications} fits")
    logger.info(f"Replication study finished: {len(frame)} rows from {len(tasks)} tasks")
    return frame


def variance_decomposition(frame: pd.DataFrame) -> pd.DataFrame:
    """Between-realization against within-realization variance of repeated PF estimates.

    For each (length, particles, parameter), the within variance averages the
    spread of one series' repeated fits; the between variance is the spread of
    the per-series means.
    """
    repeated = frame[frame["fit"] > PRIMARY_FIT]
    columns = ["length", "particles", "parameter", "realizations", "between_variance", "within_variance", "ratio"]
    if repeated.empty:
        return pd.DataFrame(columns=columns)
    per_series = repeated.groupby(["length", "particles", "parameter", "replication"])["estimate"].agg(["mean", "var"])
    summary = per_series.groupby(level=["length", "particles", "parameter"]).agg(
        realizations=("mean", "size"),
        between_variance=("mean", "var"),
        within_variance=("var", "mean"),
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        summary["ratio"] = summary["between_variance"] / summary["within_variance"]
    return summary.reset_index()[columns]
