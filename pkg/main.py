import argparse
import json
import logging
import sys

from count_copula.config.general_config import GeneralConfig, get_commands
from count_copula.core.count_series_runner import CountSeriesRunner
from count_copula.core.errors import EXIT_FAILURE, EXIT_OK, CountCopulaError
from count_copula.estimators.base_estimator import get_supported_estimators
from count_copula.marginals.base_marginal import get_supported_marginals
from count_copula.particle_filters.base_particle_filter import get_supported_filters
from count_copula.utils.log_handler import LOG_LEVELS, generate_unique_log_path, setup_logging

logger = logging.getLogger(__name__)


def json_object(value):
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e.msg}")
    if not isinstance(parsed, dict):
        raise argparse.ArgumentTypeError("expected a JSON object such as '{\"lam\": 2}'")
    return parsed


def order_pair(value):
    try:
        p, q = (int(part) for part in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'p,q', got {value!r}")
    return [p, q]


def handle_args(argv=None):
    parser = argparse.ArgumentParser(description="Simulate, fit and check Gaussian-copula count time series")
    parser.add_argument("command", choices=get_commands(), help="What to run")
    parser.add_argument(
        "--config",
        help="Path to a JSON file with flat settings (see configs/). Command-line flags take precedence over it.",
    )
    parser.add_argument(
        "--log",
        choices=LOG_LEVELS,
        help="Log level (default: INFO), can be DEBUG, INFO, WARNING, ERROR, CRITICAL",
    )
    parser.add_argument("--seed", type=int, help="Root random seed (default: 0)")
    parser.add_argument("--threads", type=int, help="Worker processes for the replicate command (default: 1)")
    parser.add_argument("--out-dir", dest="out_dir", help="Output folder (default: output)")

    model_group = parser.add_argument_group(title="model")
    model_group.add_argument("--family", choices=get_supported_marginals(), help="Marginal family (default: poisson)")
    model_group.add_argument("--params", type=json_object, help="Marginal parameters as JSON, e.g. '{\"lam\": 2}'")
    model_group.add_argument("--fixed", type=json_object, help="Parameters held fixed, e.g. '{\"n\": 10}' for binomial")
    model_group.add_argument("--components", type=int, help="Mixture components for mixpoisson (default: 2)")
    model_group.add_argument("--ar", type=float, nargs="*", help="Latent AR coefficients for simulate/replicate")
    model_group.add_argument("--ma", type=float, nargs="*", help="Latent MA coefficients for simulate/replicate")
    model_group.add_argument("--length", type=int, help="Simulate x_0..x_T for this T (default: 400)")
    model_group.add_argument(
        "--covariates-file",
        dest="covariates_file",
        help="CSV with one covariate row per time point; the marginal then follows a regression",
    )
    model_group.add_argument("--covariate-columns", dest="covariate_columns", nargs="+", help="Covariate column names")
    model_group.add_argument("--beta", type=float, nargs="+", help="Regression coefficients beta_0..beta_J for simulate")

    filter_group = parser.add_argument_group(title="particle filter")
    filter_group.add_argument("--particles", type=int, help="Number of particles N (default: 1000)")
    filter_group.add_argument("--filter", choices=get_supported_filters(), help="Particle filter (default: sisr)")
    filter_group.add_argument(
        "--ess-threshold",
        dest="ess_threshold",
        type=float,
        help="SISR resamples when ESS falls below this fraction of N (default: 0.5)",
    )

    fit_group = parser.add_argument_group(title="fit")
    fit_group.add_argument("--input", help="Counts CSV file")
    fit_group.add_argument("--column", help="Counts column (default: x, else the last column)")
    fit_group.add_argument(
        "--estimators", nargs="+", choices=get_supported_estimators(), help="Estimators to run (default: gl iyw pf)"
    )
    fit_group.add_argument(
        "--orders", type=order_pair, nargs="+", help="Latent ARMA orders as p,q pairs (default: 0,0 1,0 0,1)"
    )
    fit_group.add_argument("--link-order", dest="link_order", type=int, help="Hermite truncation order K (default: 25)")

    diagnose_group = parser.add_argument_group(title="diagnose")
    diagnose_group.add_argument("--fit-file", dest="fit_file", help="fits.json written by the fit command")
    diagnose_group.add_argument("--bins", type=int, help="PIT histogram bins (default: 10)")
    diagnose_group.add_argument(
        "--filter-trace", dest="filter_trace", action="store_true", default=None, help="Write the filter trace CSV"
    )

    replicate_group = parser.add_argument_group(title="replicate")
    replicate_group.add_argument("--replications", type=int, help="Replications per series length (default: 200)")
    replicate_group.add_argument("--lengths", type=int, nargs="+", help="Series lengths (default: 100 200 400)")
    replicate_group.add_argument(
        "--repeated-fits",
        dest="repeated_fits",
        type=int,
        help="Extra PF fits per realization and particle count, for the variance decomposition (default: 0)",
    )
    replicate_group.add_argument(
        "--repeat-particles",
        dest="repeat_particles",
        type=int,
        nargs="+",
        help="Particle counts of the repeated fits (default: 5 10 100 500)",
    )

    output_group = parser.add_argument_group(title="simulate output")
    output_group.add_argument(
        "--debug-latent", dest="debug_latent", action="store_true", default=None, help="Add the latent path z to series.csv"
    )
    output_group.add_argument(
        "--export-link", dest="export_link", action="store_true", default=None, help="Write the Hermite link table"
    )

    args = parser.parse_args(argv)
    return GeneralConfig(args)


def main(config=None):
    if not config:
        config = handle_args()

    config.log_file = str(generate_unique_log_path())
    setup_logging(config.log or "INFO", config.log_file)

    try:
        config.resolve()
        config.validate()
        logging.getLogger().setLevel(config.log)
        logger.debug(f"Configuration:\n{config}")
        CountSeriesRunner(config).run()
    except CountCopulaError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
