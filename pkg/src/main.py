import argparse
import logging
import os
import sys
from typing import Any, Optional

from manager.experiment_config import ExperimentConfig, load_config
from manager.run_program import make_app_state, run_sweep, verify
from report.emit import emit_reports
from util.app_logger import init_logger
from util.errors import ConfigError

WORKERS_ENV = "LAMIN_SMOOTH_WORKERS"

# Subcommand to suite, and the family each suite runs on when none is given
SUBCOMMANDS = {
    "check-assumption": "assumption",
    "smooth2d": "smooth2d",
    "smooth3d-surface": "surface",
    "smooth3d-curve": "curve",
}
DEFAULT_FAMILIES = {
    "assumption": "canonical-osgood",
    "smooth2d": "canonical-osgood",
    "surface": "canonical-surface",
    "curve": "canonical-osgood-3d",
}

LOG_LEVELS = {
    "ERROR": logging.ERROR,
    "WARNING": logging.WARNING,
    "INFO": logging.INFO,
    "DEBUG": logging.DEBUG,
}


def parse_list(text: str, cast) -> list:
    """Comma-separated values, e.g. "0.1,0.05"."""
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid list {text!r}: {e}") from e


def add_output_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--out", type=str, help="Output directory for tables and plot data.")
    parser.add_argument("--seed", type=int, help="Random seed.")
    parser.add_argument("--workers", type=int, help=f"Concurrent sweep cells; {WORKERS_ENV} overrides.")
    parser.add_argument(
        "--loglevel",
        type=str,
        choices=LOG_LEVELS.keys(),
        default="INFO",
        help="Sets the logging level (default: INFO).",
    )


def add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=str, help="Experiment file (JSON, Format experiment).")
    parser.add_argument("--family", type=str, help="Catalog id, or slope-field:<path> for a sampled field.")
    parser.add_argument(
        "--delta", type=lambda s: parse_list(s, float), help="Comma-separated grid spacings, e.g. 0.1,0.05."
    )
    parser.add_argument("--grid-j", type=lambda s: parse_list(s, int), help="Comma-separated partition sizes J.")
    parser.add_argument("--tau", type=float, help="Exponent of the leaf deviation bound, in (0, 1).")
    parser.add_argument("--tol", type=float, help="Integrator tolerance.")
    add_output_arguments(parser)


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    """
    Parses arguments. Handles arguments in any order.

    Returns:
        arguments (Namespace): Collection of arguments parsed.
    """
    parser = argparse.ArgumentParser(description="Lamination smoothing verification harness")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command, suite in SUBCOMMANDS.items():
        sub = subparsers.add_parser(command, help=f"Run the {suite} suite.")
        add_common_arguments(sub)

    sweep = subparsers.add_parser("sweep", help="Run the suite named in the experiment file.")
    add_common_arguments(sweep)

    verify_parser = subparsers.add_parser("verify", help="Run the acceptance suites.")
    verify_parser.add_argument("suites", nargs="*", help="Suite ids, e.g. A1 A3.")
    verify_parser.add_argument("--all", action="store_true", help="Run every acceptance suite.")
    # The suites carry their own families, spacings and checks
    add_output_arguments(verify_parser)
    return parser.parse_args(argv)


def resolve_workers(args: argparse.Namespace) -> Optional[int]:
    """LAMIN_SMOOTH_WORKERS, when set, wins over --workers."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return args.workers
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"expected an integer, got {raw!r}", field=WORKERS_ENV) from e


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """The experiment file (or defaults) with command-line overrides applied."""
    suite = SUBCOMMANDS.get(args.command)
    if args.config is not None:
        config = load_config(args.config)
    else:
        base: dict[str, Any] = {}
        if suite is not None:
            base = {"suite": suite, "family": {"id": DEFAULT_FAMILIES[suite]}}
        config = ExperimentConfig.from_dict(base)

    overrides: dict[str, Any] = {
        "suite": suite,
        "family.id": args.family,
        "smoothing.delta": args.delta,
        "smoothing.J": args.grid_j,
        "smoothing.tau": args.tau,
        "output.dir": args.out,
        "seed": args.seed,
        "workers": resolve_workers(args),
        "integrator.tol": args.tol,
    }
    return config.with_overrides(overrides)


def build_verify_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults with the output directory, seed and workers of the acceptance run."""
    overrides = {"output.dir": args.out, "seed": args.seed, "workers": resolve_workers(args)}
    return ExperimentConfig.from_dict({}).with_overrides(overrides)


def main(argv: Optional[list[str]] = None) -> int:
    """
    Main function, responsible for running the program.

    Returns:
        exit code (int): 0 when every report passes, 1 otherwise or on error.
    """
    args = parse_args(argv)
    try:
        config = build_verify_config(args) if args.command == "verify" else build_config(args)
    except (ConfigError, OSError) as e:
        print(f"error: {e}")
        return 1

    app_state = make_app_state(config)
    logger, q_listener = init_logger(app_state, LOG_LEVELS[args.loglevel], stdout=False)
    try:
        if args.command == "verify":
            selection = None if args.all or not args.suites else args.suites
            outcomes = verify(selection, config.out_dir, seed=args.seed, workers=resolve_workers(args))
            passed = all(outcome.passed for outcome in outcomes)
        else:
            result = run_sweep(config, app_state)
            emit_reports(result, config.out_dir, plots=config.plots)
            passed = result.passed
    except (ConfigError, OSError) as e:
        print(f"error: {e}")
        passed = False
    finally:
        q_listener.stop()
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)
        logging.shutdown()
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
