"""
One handler per subcommand. Handlers return the process exit code and
raise FlowSieveError subclasses for expected failures.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from flowsieve.config import EXIT_OK
from flowsieve.errors import ConfigError
from flowsieve.models.classifier import ModelSpec
from flowsieve.models.dataset import Dataset
from flowsieve.models.pipeline import PipelineConfig
from flowsieve.models.selection import SelectionConfig
from flowsieve.models.synth import SynthSpec
from flowsieve.services import flowdata_service
from flowsieve.services.artifact_service import (
    load_dataset,
    load_eval_report,
    load_model,
    load_trace,
    read_json,
    save_dataset,
    write_json,
)
from flowsieve.services.classifier_service import train
from flowsieve.services.evaluation_service import evaluate, kfold_cv, stratified_split, timed_train
from flowsieve.services.explain_service import feature_importance, render_report
from flowsieve.services.pipeline_service import run_pipeline
from flowsieve.services.selection_service import SelectionService, apply_selection
from flowsieve.services.synth_service import generate_with_truth

logger = logging.getLogger(__name__)


def _emit(text: str, out: Optional[str]) -> None:
    """Write machine output to ``out``, or to standard output."""
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _emit_json(payload: Dict[str, Any], out: Optional[str]) -> None:
    if out:
        write_json(Path(out), payload)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _require_files(paths: Iterable[Optional[str]]) -> None:
    missing = [p for p in paths if p is not None and not Path(p).is_file()]
    if missing:
        raise ConfigError(f"files not found: {missing}")


def _dry_run(args: argparse.Namespace, inputs: Iterable[Optional[str]]) -> bool:
    """Validate referenced files; True when the command should stop here."""
    _require_files(inputs)
    if args.dry_run:
        logger.info(f"{args.command}: arguments valid; dry run, nothing executed")
        return True
    return False


def parse_params(pairs: List[str]) -> Dict[str, Any]:
    """
    Turn KEY=VALUE strings into hyperparameters, VALUE parsed as JSON when possible.

    Raises:
        ConfigError: A pair without "="
    """
    params: Dict[str, Any] = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected KEY=VALUE, got {pair!r}")
        try:
            params[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            params[key.strip()] = raw
    return params


def _read_rules(path: Optional[str]) -> Optional[Dict[str, Any]]:
    return None if path is None else read_json(Path(path), error=ConfigError)


def _dataset_for(path: str, trace_path: Optional[str]) -> Dataset:
    d = load_dataset(Path(path))
    if trace_path:
        d = apply_selection(d, load_trace(Path(trace_path)))
    return d


def cmd_ingest(args: argparse.Namespace) -> int:
    if _dry_run(args, list(args.input) + [args.rules]):
        return EXIT_OK
    rules = _read_rules(args.rules)
    profile = args.profile or ("custom" if rules else None)
    if profile is None and not args.unlabeled:
        raise ConfigError("--profile (or --rules) is required for labelled data")
    rule, label_column, drop = None, args.label_column, []
    if profile is not None:
        rule, profile_label, drop = flowdata_service.resolve_profile(profile, rules)
        label_column = args.label_column or profile_label
    if args.drop is not None:
        drop = args.drop
    drop = list(drop)
    if args.unlabeled:
        # unlabeled captures may still carry a label column; it must not become a feature
        rule = None
        if label_column is not None:
            drop.append(label_column)
        label_column = None
    dataset, report = flowdata_service.ingest(args.input, rule, label_column, drop)
    save_dataset(dataset, Path(args.out))
    _emit_json({"inputs": list(args.input), **report.to_dict()}, args.report)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        n_rows=args.rows,
        n_informative=args.informative,
        n_noise=args.noise,
        imbalance=args.imbalance,
        label_noise=args.label_noise,
        separation=args.separation,
        seed=args.seed,
    )
    if _dry_run(args, []):
        return EXIT_OK
    result = generate_with_truth(spec)
    out = Path(args.out)
    save_dataset(result.dataset, out)
    write_json(out.with_suffix(".truth.json"), result.ground_truth())
    return EXIT_OK


def _selection_config(args: argparse.Namespace) -> SelectionConfig:
    return SelectionConfig(
        bins=args.bins,
        inclusive_positive=not args.exclusive_thresholds,
        inclusive_negative=not args.exclusive_thresholds,
        ig_strict=not args.ig_inclusive,
        rank_means_scope=args.rank_means_scope or "a2",
    )


def cmd_select(args: argparse.Namespace) -> int:
    cfg = _selection_config(args)
    if args.from_trace and args.apply_out:
        raise ConfigError("--apply-out needs --dataset")
    if _dry_run(args, [args.dataset, args.from_trace]):
        return EXIT_OK
    service = SelectionService(args.threads)
    if args.from_trace:
        trace = service.reselect(load_trace(Path(args.from_trace)), cfg)
    else:
        d = load_dataset(Path(args.dataset))
        trace = service.select(d, cfg)
    _emit_json(trace.to_dict(), args.out)
    if args.table_csv:
        trace.table.to_frame().to_csv(args.table_csv, index=False)
    if args.apply_out:
        save_dataset(apply_selection(d, trace), Path(args.apply_out))
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    spec = ModelSpec(kind=args.model, params=parse_params(args.param), seed=args.seed)
    if args.test_out and args.test_fraction is None:
        raise ConfigError("--test-out needs --test-fraction")
    if _dry_run(args, [args.dataset, args.trace]):
        return EXIT_OK
    d = _dataset_for(args.dataset, args.trace)
    train_set = d
    if args.test_fraction is not None:
        train_set, test_set = stratified_split(d, args.test_fraction, args.seed)
        if args.test_out:
            save_dataset(test_set, Path(args.test_out))
    model, seconds = timed_train(lambda t: train(spec, t, args.threads), train_set)
    write_json(Path(args.out), model.to_dict())
    logger.info(f"Trained {spec.kind} in {seconds:.2f} s (fingerprint {model.fingerprint()[:12]})")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    if _dry_run(args, [args.model, args.dataset, args.trace]):
        return EXIT_OK
    model = load_model(Path(args.model))
    d = _dataset_for(args.dataset, args.trace)
    report = evaluate(model, d, mse_mode=args.mse_mode, threads=args.threads)
    if args.format == "table":
        _emit(report.to_table() + "\n", args.out)
    else:
        _emit_json(report.to_dict(include_timing=False), args.out)
    return EXIT_OK


def cmd_cv(args: argparse.Namespace) -> int:
    spec = ModelSpec(kind=args.model, params=parse_params(args.param), seed=args.seed)
    if _dry_run(args, [args.dataset, args.trace]):
        return EXIT_OK
    d = _dataset_for(args.dataset, args.trace)
    accuracies = kfold_cv(d, args.folds, spec, args.seed, threads=args.threads)
    payload = {
        "model": spec.to_dict(),
        "folds": args.folds,
        "accuracies": accuracies,
        "mean": sum(accuracies) / len(accuracies),
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    if _dry_run(args, [args.model, args.trace, args.eval]):
        return EXIT_OK
    model = load_model(Path(args.model))
    trace = load_trace(Path(args.trace))
    evaluation = load_eval_report(Path(args.eval)) if args.eval else None
    importance = feature_importance(model, args.mode, trace)
    _emit(render_report(trace, evaluation, importance, args.top, args.format), args.out)
    return EXIT_OK


def pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Merge the configuration file with the command-line overrides.

    Raises:
        ConfigError: Unreadable configuration or invalid merged values
    """
    data: Dict[str, Any] = read_json(Path(args.config), error=ConfigError) if args.config else {}
    data.pop("schema_version", None)
    overrides = {
        "inputs": args.input,
        "profile": args.profile,
        "rules": _read_rules(args.rules),
        "label_column": args.label_column,
        "drop_columns": args.drop,
        "seed": args.seed,
        "output_dir": args.out_dir,
        "test_fraction": args.test_fraction,
        "cv_folds": args.folds,
        "scale_fit_on": args.fit_on,
        "ddof": args.ddof,
        "mse_mode": args.mse_mode,
        "importance_mode": args.importance_mode,
        "top": args.top,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    if args.no_scale:
        data["scale"] = False

    selection = dict(data.get("selection") or {})
    if args.bins is not None:
        selection["bins"] = args.bins
    if args.rank_means_scope is not None:
        selection["rank_means_scope"] = args.rank_means_scope
    if args.exclusive_thresholds:
        selection["inclusive_positive"] = selection["inclusive_negative"] = False
    if args.ig_inclusive:
        selection["ig_strict"] = False
    data["selection"] = selection

    model = dict(data.get("model") or {})
    if args.model is not None:
        if model.get("kind") not in (None, args.model):
            model["params"] = {}
        model["kind"] = args.model
    if args.param:
        model["params"] = {**model.get("params", {}), **parse_params(args.param)}
    if model:
        data["model"] = model
    return PipelineConfig.from_dict(data)


def cmd_pipeline(args: argparse.Namespace) -> int:
    _require_files([args.config, args.rules])
    cfg = pipeline_config(args)
    result = run_pipeline(cfg, threads=args.threads, dry_run=args.dry_run)
    summary: Dict[str, Any] = {"config_hash": result.config_hash, "dry_run": result.dry_run}
    if not result.dry_run:
        summary.update(
            selected=list(result.trace.a6),
            accuracy=result.report.accuracy,
            artifacts={name: str(path) for name, path in sorted(result.artifacts.items())},
        )
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK
