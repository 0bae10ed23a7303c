"""weakgrad – command-line entry point.

    python -m weakgrad run --model mm1 --n-customers 5 --estimator wd,iswd --n 100000
    python -m weakgrad compare --estimator iswd,wd,sf --time-budget-s 5

Exit status: 0 success, 1 runtime failure, 2 invalid configuration (the
offending field is named), 3 unsupported model/estimator combination.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from weakgrad import __version__
from weakgrad.config import configure_logging
from weakgrad.errors import ConfigError, UnsupportedCombinationError, WeakGradError
from weakgrad.experiment.config import ExperimentConfig, load_config_file, resolve_config
from weakgrad.experiment.graph import execute

logger = logging.getLogger("weakgrad")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_CONFIG = 2
EXIT_UNSUPPORTED = 3

# argparse dest → ExperimentConfig field
_FLAG_FIELDS = (
    "model",
    "n_customers",
    "service_mean",
    "arrival_mean",
    "service_dist",
    "arrival_dist",
    "estimator",
    "n",
    "time_budget_s",
    "seed",
    "confidence",
    "fd_step",
    "block_size",
    "workers",
    "out",
    "format",
    "omit_timing",
)


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")

    model = parser.add_argument_group("model")
    model.add_argument("--model", choices=["mm1", "san_bridge"])
    model.add_argument("--n-customers", type=int)
    model.add_argument("--service-mean", type=float)
    model.add_argument("--arrival-mean", type=float)
    model.add_argument("--service-dist", help="e.g. gamma{shape=2,scale=0.5}; SAN arcs use it too")
    model.add_argument("--arrival-dist", help="e.g. exponential{mean=2}")

    run = parser.add_argument_group("estimation")
    run.add_argument("--estimator", help="comma list of wd, iswd, sf, fd")
    budget = run.add_mutually_exclusive_group()
    budget.add_argument("--n", type=int, help="replications per estimator")
    budget.add_argument("--time-budget-s", type=float, help="wall-clock seconds per estimator")
    run.add_argument("--seed", type=int)
    run.add_argument("--confidence", type=float)
    run.add_argument("--fd-step", type=float)
    run.add_argument("--block-size", type=int, help="replications per vectorized call; does not change samples")
    run.add_argument("--workers", type=int, help="threads for fixed-n runs; time-budgeted runs are serial")

    out = parser.add_argument_group("output")
    out.add_argument("--out", help="output file; stdout when omitted")
    out.add_argument("--format", choices=["csv", "json"])
    out.add_argument(
        "--omit-timing",
        action="store_true",
        default=None,
        help="blank wall time and efficiency so fixed-n outputs are byte-identical",
    )
    out.add_argument("--log-level", default=None, help="overrides WEAKGRAD_LOG_LEVEL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakgrad",
        description="Weak-derivative, score-function and finite-difference gradient experiments.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    _add_experiment_flags(commands.add_parser("run", help="run estimators and write a result table"))
    _add_experiment_flags(
        commands.add_parser("compare", help="run >= 2 estimators and print equal-time verdicts")
    )
    return parser


def _field_name(exc: ValidationError) -> str:
    error = exc.errors()[0]
    loc = [str(part) for part in error.get("loc", ())]
    return ".".join(loc) if loc else "n/time_budget_s"


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values: Dict[str, Any] = load_config_file(args.config) if args.config else {}
    flag_values = {name: getattr(args, name) for name in _FLAG_FIELDS}
    return resolve_config(file_values, flag_values)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = config_from_args(args)
        if args.command == "compare" and len(config.estimator) < 2:
            raise ConfigError("estimator", "compare needs at least two estimators")
    except ValidationError as exc:
        field = _field_name(exc)
        logger.error("Invalid configuration field '%s': %s", field, exc.errors()[0].get("msg"))
        print(f"error: invalid configuration field '{field}'", file=sys.stderr)
        return EXIT_INVALID_CONFIG
    except ConfigError as exc:
        logger.error("Invalid configuration field '%s': %s", exc.field, exc)
        print(f"error: invalid configuration field '{exc.field}'", file=sys.stderr)
        return EXIT_INVALID_CONFIG

    try:
        state = execute(config)
    except UnsupportedCombinationError as exc:
        logger.error("Unsupported combination: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (WeakGradError, ValidationError) as exc:
        logger.exception("Experiment failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE

    if args.command == "compare":
        verdicts = [v.model_dump(mode="json") for v in state["comparisons"]]
        print(json.dumps(verdicts, indent=2, sort_keys=True))
    return EXIT_OK


__all__ = ["build_parser", "config_from_args", "main"]
