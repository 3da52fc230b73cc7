import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from count_copula.config.general_config import DIAGNOSE, FIT, REPLICATE, SIMULATE, GeneralConfig
from count_copula.core.diagnostics import latent_residuals, pit_histogram, residual_summaries
from count_copula.core.errors import CountCopulaError, DataError, NumericalError
from count_copula.core.fit_result import PF, FitResult
from count_copula.core.hermite_link import link_table, link_table_frame
from count_copula.core.latent_gaussian import LatentModel
from count_copula.core.sampler import RegressionSpec, simulate_counts
from count_copula.core.study import ReplicationScheme, run_study, variance_decomposition
from count_copula.estimators.base_estimator import ParameterSpace, get_estimator
from count_copula.marginals.base_marginal import get_marginal
from count_copula.utils.utils import read_counts, read_covariates, read_json, write_csv, write_json

logger = logging.getLogger(__name__)

SERIES_FILE = "series.csv"
LINK_FILE = "link_table.csv"
FITS_FILE = "fits.json"
SELECTION_FILE = "model_selection.csv"
PIT_FILE = "pit.csv"
RESIDUALS_FILE = "residuals.csv"
RESIDUAL_ACF_FILE = "residual_acf.csv"
RESIDUAL_SUMMARY_FILE = "residual_summary.json"
TRACE_FILE = "filter_trace.csv"
REPLICATIONS_FILE = "replications.csv"
DECOMPOSITION_FILE = "variance_decomposition.csv"


def select_fit(payload) -> FitResult:
    """The fit with the smallest BIC from a fits file, or its only/first fit."""
    entries = payload.get("fits", [payload]) if isinstance(payload, dict) else payload
    if not entries:
        raise DataError("fit_file: no fits found")
    fits = [FitResult.from_dict(entry) for entry in entries]
    scored = [fit for fit in fits if fit.bic is not None and math.isfinite(fit.bic)]
    return min(scored, key=lambda fit: fit.bic) if scored else fits[0]


class CountSeriesRunner:
    def __init__(self, config: GeneralConfig):
        self.config = config
        self.out_dir = Path(config.out_dir)

    def __str__(self) -> str:
        return f"{self.config}"

    def run(self):
        logger.info(f"Starting {self.config.command}...")
        if self.config.command == SIMULATE:
            outputs = self.simulate()
        elif self.config.command == FIT:
            outputs = self.fit()
        elif self.config.command == DIAGNOSE:
            outputs = self.diagnose()
        elif self.config.command == REPLICATE:
            outputs = self.replicate()
        else:
            raise ValueError(f"Invalid command: {self.config.command}")
        logger.info(f"{self.config.command} finished, outputs: {[str(path) for path in outputs]}")
        return outputs

    def covariates(self, columns=None):
        columns = columns or self.config.covariate_columns
        if not self.config.covariates_file:
            return None
        return read_covariates(self.config.covariates_file, columns)

    def simulate(self):
        config = self.config
        model = LatentModel(ar=tuple(config.ar), ma=tuple(config.ma))
        covariates = self.covariates()
        if covariates is not None:
            spec = RegressionSpec(
                family=config.family,
                beta=tuple(config.beta),
                covariates=covariates,
                static_params={**config.fixed, **config.static_params},
                linked_param=config.linked_param,
            )
            length = spec.length - 1
        else:
            spec = get_marginal(config.family, {**config.fixed, **config.params})
            length = config.length

        rng = np.random.default_rng(config.seed)
        x, z = simulate_counts(spec, model, length, rng, return_latent=True)
        frame = pd.DataFrame({"t": np.arange(len(x)), "x": x})
        if covariates is not None:
            for j, column in enumerate(config.covariate_columns):
                frame[column] = covariates[:, j]
        if config.debug_latent:
            frame["z"] = z
        outputs = [write_csv(frame, self.out_dir / SERIES_FILE)]

        if config.export_link:
            if covariates is not None:
                logger.warning("export_link: the link varies with the covariates, no table written")
            else:
                table = link_table(spec, order=config.link_order, mc_paths=config.mc_paths, seed=config.seed, pseudo=config.pseudo)
                outputs.append(write_csv(link_table_frame(table), self.out_dir / LINK_FILE))
        return outputs

    def estimator_options(self, name):
        config = self.config
        options = {"restarts": config.restarts, "link_order": config.link_order, "std_errors": config.std_errors}
        if name == PF:
            options.update(
                particles=config.particles,
                filter_name=config.filter,
                ess_threshold=config.ess_threshold,
                seed=config.seed,
                optimizer_mode=config.optimizer_mode,
                global_generations=config.global_generations,
            )
        return options

    def fit(self):
        config = self.config
        data = read_counts(config.input, config.column)
        covariates = self.covariates()
        if covariates is not None and len(covariates) != len(data):
            raise DataError(f"{config.covariates_file}: {len(covariates)} covariate rows for {len(data)} counts")

        fits = []
        for ar_order, ma_order in config.orders:
            for name in config.estimators:
                try:
                    space = ParameterSpace(
                        config.family,
                        ar_order,
                        ma_order,
                        fixed=config.fixed,
                        components=config.components,
                        covariates=covariates,
                        linked_param=config.linked_param,
                    )
                    fit = get_estimator(name, space, **self.estimator_options(name)).fit(data)
                except CountCopulaError as e:
                    logger.warning(f"{name.upper()} ARMA({ar_order},{ma_order}) skipped: {e}")
                    continue
                if covariates is not None:
                    fit.covariate_columns = list(config.covariate_columns)
                fits.append(fit)
        if not fits:
            raise NumericalError("fit: no model could be fitted, see warnings above")

        payload = {
            "data": {"input": str(config.input), "column": config.column, "n_obs": len(data)},
            "fits": [fit.to_dict() for fit in fits],
        }
        selection = pd.DataFrame([fit.summary_row() for fit in fits])
        selection["bic_rank"] = selection.groupby("method")["bic"].rank(method="min")
        for fit in fits:
            if fit.bic is not None:
                logger.info(f"{fit.method.upper()} {fit.model}: AIC {fit.aic:.3f}, BIC {fit.bic:.3f}")
        return [
            write_json(payload, self.out_dir / FITS_FILE),
            write_csv(selection, self.out_dir / SELECTION_FILE),
        ]

    def diagnose(self):
        config = self.config
        data = read_counts(config.input, config.column)
        fit = select_fit(read_json(config.fit_file))
        covariates = self.covariates(fit.covariate_columns) if fit.covariate_columns else None
        spec, model = fit.assemble(covariates)
        particles = fit.particles or config.particles
        filter_name = fit.filter_name or config.filter
        logger.info(f"Diagnosing {fit} with {filter_name.upper()} at N={particles}")

        histogram, ps = pit_histogram(
            data,
            spec,
            model,
            bins=config.bins,
            particles=particles,
            filter_name=filter_name,
            ess_threshold=config.ess_threshold,
            seed=config.seed,
        )
        residuals = latent_residuals(data, spec, model)
        outputs = [
            write_csv(histogram.frame(), self.out_dir / PIT_FILE),
            write_csv(residuals.frame(), self.out_dir / RESIDUALS_FILE),
        ]
        summary_payload = {
            "method": fit.method,
            "model": fit.model,
            "family": fit.family,
            "pit_heights": histogram.heights,
            "filter_loglik": ps.loglik,
        }
        try:
            summary = residual_summaries(residuals.residuals)
        except DataError as e:
            logger.warning(f"Residual summaries skipped: {e}")
        else:
            outputs.append(write_csv(summary.frame(), self.out_dir / RESIDUAL_ACF_FILE))
            summary_payload["residuals"] = summary.to_dict()
        outputs.append(write_json(summary_payload, self.out_dir / RESIDUAL_SUMMARY_FILE))

        if config.filter_trace:
            trace = ps.trace
            frame = pd.DataFrame(
                {
                    "t": np.arange(len(trace.ess)),
                    "ess": trace.ess,
                    "log_increment": trace.log_increment,
                    "resampled": trace.resampled,
                    "p_upper": trace.p_upper,
                    "p_lower": trace.p_lower,
                }
            )
            outputs.append(write_csv(frame, self.out_dir / TRACE_FILE))
        return outputs

    def scheme(self) -> ReplicationScheme:
        config = self.config
        return ReplicationScheme(
            family=config.family,
            params=dict(config.params),
            ar=tuple(config.ar),
            ma=tuple(config.ma),
            fixed=dict(config.fixed),
            components=config.components,
            estimators=tuple(config.estimators),
            lengths=tuple(config.lengths),
            replications=config.replications,
            seed=config.seed,
            particles=config.particles,
            filter_name=config.filter,
            ess_threshold=config.ess_threshold,
            optimizer_mode=config.optimizer_mode,
            global_generations=config.global_generations,
            restarts=config.restarts,
            link_order=config.link_order,
            repeated_fits=config.repeated_fits,
            repeat_particles=tuple(config.repeat_particles),
        )

    def replicate(self):
        config = self.config
        frame = run_study(self.scheme(), threads=config.threads, log_level=config.log, log_file=config.log_file)
        outputs = [write_csv(frame, self.out_dir / REPLICATIONS_FILE)]
        if config.repeated_fits:
            outputs.append(write_csv(variance_decomposition(frame), self.out_dir / DECOMPOSITION_FILE))
        return outputs
