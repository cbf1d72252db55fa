"""
Command-line parser and dispatch for flowsieve.
"""
import argparse
import logging
import sys
from typing import List, Optional

from flowsieve.config import (
    DEFAULT_BINS,
    DEFAULT_CV_FOLDS,
    DEFAULT_LOG_LEVEL,
    DEFAULT_MODEL_KIND,
    DEFAULT_SEPARATION,
    DEFAULT_THREADS,
    DEFAULT_TOP_FEATURES,
    EXIT_UNEXPECTED,
    IMPORTANCE_MODES,
    MODEL_KINDS,
    MSE_MODES,
    PROFILE_NAMES,
    RANK_MEANS_SCOPES,
    REPORT_FORMATS,
    SCALE_FIT_ON_OPTIONS,
)
from flowsieve.app import configure_logging
from flowsieve.cli import commands
from flowsieve.errors import FlowSieveError, StageError

logger = logging.getLogger(__name__)


def _add_profile_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--profile", choices=PROFILE_NAMES, help="dataset profile (label rule, label column, drop list)")
    parser.add_argument("--rules", help="JSON label rule document, required for the custom profile")
    parser.add_argument("--label-column", help="label column, overrides the profile")
    parser.add_argument("--drop", nargs="*", default=None, help="columns to drop, overrides the profile")


def _add_model_options(parser: argparse.ArgumentParser, default_kind: Optional[str] = DEFAULT_MODEL_KIND) -> None:
    parser.add_argument("--model", choices=MODEL_KINDS, default=default_kind, help="classifier kind")
    parser.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="hyperparameter override, VALUE parsed as JSON (repeatable)",
    )


def _add_selection_options(parser: argparse.ArgumentParser, default_bins: Optional[int] = DEFAULT_BINS) -> None:
    parser.add_argument("--bins", type=int, default=default_bins, help="equal-frequency bins for information gain")
    parser.add_argument("--rank-means-scope", choices=RANK_MEANS_SCOPES, default=None)
    parser.add_argument("--exclusive-thresholds", action="store_true", help="use > and < in the correlation steps")
    parser.add_argument("--ig-inclusive", action="store_true", help="keep features whose gain equals the mean")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="flowsieve",
        description="Hybrid correlation / information gain feature selection for flow-based intrusion detection.",
    )
    parser.add_argument("--threads", type=int, default=DEFAULT_THREADS, help="worker cap for parallel stages")
    parser.add_argument(
        "--log-level",
        default=DEFAULT_LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="log verbosity (logs go to standard error)",
    )
    parser.add_argument("--dry-run", action="store_true", help="validate arguments and inputs, run nothing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, clean and binarize flow CSV files into a dataset")
    p.add_argument("--input", nargs="+", required=True, help="CSV files of one capture, concatenated in order")
    _add_profile_options(p)
    p.add_argument("--unlabeled", action="store_true", help="keep no labels (inference data)")
    p.add_argument("--out", required=True, help="dataset file (.npz)")
    p.add_argument("--report", help="cleaning report JSON (default: standard output)")
    p.set_defaults(handler=commands.cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic dataset with known informative features")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--informative", type=int, required=True)
    p.add_argument("--noise", type=int, required=True)
    p.add_argument("--imbalance", type=float, default=0.5, help="fraction of attack rows")
    p.add_argument("--label-noise", type=float, default=0.0, help="fraction of labels flipped")
    p.add_argument("--separation", type=float, default=DEFAULT_SEPARATION, help="class mean distance in sigmas")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="dataset file (.npz); ground truth goes next to it")
    p.set_defaults(handler=commands.cmd_synth)

    p = sub.add_parser("select", help="run the hybrid feature selection")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--dataset")
    source.add_argument("--from-trace", help="rerun the steps on the statistics stored in a trace JSON")
    _add_selection_options(p)
    p.add_argument("--out", help="trace JSON (default: standard output)")
    p.add_argument("--table-csv", help="also write the per-feature statistics as CSV")
    p.add_argument("--apply-out", help="also write the dataset projected onto the selection (.npz)")
    p.set_defaults(handler=commands.cmd_select)

    p = sub.add_parser("train", help="train a classifier, optionally on a stratified split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--trace", help="selection trace; the dataset is projected onto its selection")
    _add_model_options(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--test-fraction", type=float, default=None, help="hold out this fraction first")
    p.add_argument("--test-out", help="where to write the held-out rows (.npz)")
    p.add_argument("--out", required=True, help="model JSON")
    p.set_defaults(handler=commands.cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a model on a labelled dataset")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--dataset", required=True)
    p.add_argument("--trace", help="selection trace to project the dataset with")
    p.add_argument("--mse-mode", choices=MSE_MODES, default="hard")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out", help="report file (default: standard output)")
    p.set_defaults(handler=commands.cmd_evaluate)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--trace", help="selection trace to project the dataset with")
    _add_model_options(p)
    p.add_argument("--folds", type=int, default=DEFAULT_CV_FOLDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="fold accuracies JSON (default: standard output)")
    p.set_defaults(handler=commands.cmd_cv)

    p = sub.add_parser("explain", help="feature importance and the combined report")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--trace", required=True, help="selection trace JSON")
    p.add_argument("--eval", help="evaluation report JSON to include")
    p.add_argument("--top", type=int, default=DEFAULT_TOP_FEATURES)
    p.add_argument("--format", choices=REPORT_FORMATS, default="md")
    p.add_argument("--mode", choices=IMPORTANCE_MODES, default="gain")
    p.add_argument("--out", help="report file (default: standard output)")
    p.set_defaults(handler=commands.cmd_explain)

    p = sub.add_parser("pipeline", help="run every stage from a JSON configuration")
    p.add_argument("--config", help="pipeline configuration JSON")
    p.add_argument("--input", nargs="+", help="inputs, overrides the configuration")
    _add_profile_options(p)
    _add_model_options(p, default_kind=None)
    _add_selection_options(p, default_bins=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--test-fraction", type=float)
    p.add_argument("--folds", type=int, help="cross-validation folds, 0 to skip")
    p.add_argument("--no-scale", action="store_true", help="skip standardization")
    p.add_argument("--fit-on", choices=SCALE_FIT_ON_OPTIONS, help="rows the scaler is fit on")
    p.add_argument("--ddof", type=int, choices=[0, 1])
    p.add_argument("--mse-mode", choices=MSE_MODES)
    p.add_argument("--importance-mode", choices=IMPORTANCE_MODES)
    p.add_argument("--top", type=int)
    p.set_defaults(handler=commands.cmd_pipeline)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv`` and run the chosen command.

    Returns:
        int: Process exit code (0 success, 2 configuration, 3 data, 4 training, 1 unexpected)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.handler(args)
    except StageError as e:
        print(f"{e.stage}: {e.cause}", file=sys.stderr)
        return e.exit_code
    except FlowSieveError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {str(e)}", exc_info=True)
        print(f"{args.command}: unexpected error: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED
