"""
Pipeline service: ingest, scale, select, split, train, evaluate,
cross-validate and explain, in that order, writing each stage's artifact.

Every JSON artifact except ``run_metadata.json`` depends only on the
configuration and the input bytes, so reruns reproduce them byte for byte.
Clock readings live in ``run_metadata.json``.
"""
import logging
import time
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Callable, Dict, Optional, Tuple

from flowsieve.config import DATASET_FILE_SUFFIX, DEFAULT_THREADS
from flowsieve.errors import ConfigError, FlowSieveError, StageError
from flowsieve.models.dataset import Dataset, LoadReport
from flowsieve.models.pipeline import PipelineConfig, PipelineResult
from flowsieve.services import flowdata_service
from flowsieve.services.artifact_service import ArtifactStore, config_hash, load_dataset
from flowsieve.services.classifier_service import train
from flowsieve.services.evaluation_service import (
    evaluate,
    kfold_cv,
    report_summary,
    split_indices,
    stratified_split,
    timed_train,
)
from flowsieve.services.explain_service import feature_importance, importance_frame, render_report
from flowsieve.services.scaling_service import fit_scaler, transform
from flowsieve.services.selection_service import SelectionService, apply_selection

logger = logging.getLogger(__name__)


def _package_version() -> str:
    try:
        return version("flowsieve")
    except PackageNotFoundError:
        return "unknown"


def validate(cfg: PipelineConfig) -> None:
    """
    Check everything that can be checked without reading data.

    Raises:
        ConfigError: Missing input files, mixed input kinds or a custom profile without rules
    """
    missing = [str(p) for p in cfg.input_paths if not p.is_file()]
    if missing:
        raise ConfigError(f"input files not found: {missing}")
    containers = [p for p in cfg.input_paths if p.suffix == DATASET_FILE_SUFFIX]
    if containers and len(cfg.input_paths) > 1:
        raise ConfigError("a dataset container must be the only input")
    if not containers:
        flowdata_service.resolve_profile(cfg.profile, cfg.rules)


def load_input(cfg: PipelineConfig) -> Tuple[Dataset, LoadReport]:
    """Read the configured inputs into a labelled Dataset."""
    paths = cfg.input_paths
    if len(paths) == 1 and paths[0].suffix == DATASET_FILE_SUFFIX:
        d = load_dataset(paths[0])
        report = LoadReport(rows_in=d.n_rows)
        if d.has_labels:
            report = LoadReport(rows_in=d.n_rows, per_class_counts=d.class_counts())
    else:
        rule, label_column, drop = flowdata_service.resolve_profile(cfg.profile, cfg.rules)
        if cfg.label_column is not None:
            label_column = cfg.label_column
        if cfg.drop_columns is not None:
            drop = list(cfg.drop_columns)
        d, report = flowdata_service.ingest(paths, rule, label_column, drop)
    d.require_labels()
    d.require_both_classes()
    return d, report


class PipelineRunner:
    """Runs one configured pipeline and records where its artifacts went."""

    def __init__(self, cfg: PipelineConfig, threads: int = DEFAULT_THREADS):
        """
        Initialize the runner.

        Args:
            cfg: Resolved pipeline configuration
            threads: Worker cap for every parallel stage
        """
        self.cfg = cfg
        self.threads = threads
        self.config_hash = config_hash(cfg.to_dict())
        self.selection = SelectionService(threads)
        self.store: Optional[ArtifactStore] = None
        self.stage_seconds: Dict[str, float] = {}
        self.artifacts: Dict[str, Any] = {}
        self.started = datetime.now(timezone.utc)

    def _stage(self, name: str, func: Callable[..., Any], *args) -> Any:
        logger.info(f"Stage {name}")
        start = time.perf_counter()
        try:
            return func(*args)
        except FlowSieveError as e:
            logger.error(f"Stage {name} failed: {str(e)}", exc_info=True)
            raise StageError(name, e) from e
        finally:
            self.stage_seconds[name] = time.perf_counter() - start

    def _write(self, name: str, payload: Dict[str, Any]) -> None:
        self.artifacts[name] = self.store.write(name, payload)

    def run(self) -> PipelineResult:
        cfg = self.cfg
        self.started = datetime.now(timezone.utc)
        self.store = ArtifactStore(cfg.output_dir, self.config_hash)
        self._write("metadata", self._metadata(None, None))

        dataset, load_report = self._stage("ingest", load_input, cfg)
        self.artifacts["dataset"] = self.store.save_dataset(dataset)
        self._write("ingest_report", {"inputs": list(cfg.inputs), **load_report.to_dict()})

        scaled = self._stage("scale", self._scale, dataset)
        trace, selected = self._stage("select", self._select, scaled)

        train_set, test_set = self._stage("split", stratified_split, selected, cfg.test_fraction, cfg.seed)
        model, train_seconds = self._stage(
            "train", timed_train, lambda t: train(cfg.model, t, self.threads), train_set
        )
        self._write("model", model.to_dict())

        report = self._stage("evaluate", evaluate, model, test_set, train_seconds, None, cfg.mse_mode, self.threads)
        self._write("eval_report", report.to_dict(include_timing=False))
        if cfg.cv_folds:
            folds = self._stage("cv", kfold_cv, selected, cfg.cv_folds, cfg.model, cfg.seed, self.threads)
            report = evaluate(model, test_set, train_seconds, folds, cfg.mse_mode, self.threads)
            self._write("eval_report", report.to_dict(include_timing=False))

        importance = None
        if model.kind == "knn":
            logger.warning("k-NN models have no feature importance; skipping the explain stage")
        else:
            importance = self._stage("explain", self._explain, model, trace, report)

        self._write("metadata", self._metadata(datetime.now(timezone.utc), train_seconds))
        logger.info(f"Pipeline finished with {len(trace.a6)} features: {report_summary(report)}; artifacts in {cfg.output_dir}")
        return PipelineResult(
            config_hash=self.config_hash,
            artifacts=dict(self.artifacts),
            trace=trace,
            report=report,
            importance=importance,
        )

    def _scale(self, dataset: Dataset) -> Dataset:
        cfg = self.cfg
        if not cfg.scale:
            logger.info("Scaling disabled")
            return dataset
        fit_on = dataset
        if cfg.scale_fit_on == "train":
            # Same rows the split stage will pick: the split depends only on labels and seed
            train_rows, _ = split_indices(dataset.require_labels(), cfg.test_fraction, cfg.seed)
            fit_on = dataset.subset_rows(train_rows)
        params = fit_scaler(fit_on, ddof=cfg.ddof)
        self._write("scaler", params.to_dict())
        return transform(params, dataset, foreign_ok=fit_on is not dataset)

    def _select(self, scaled: Dataset):
        trace = self.selection.select(scaled, self.cfg.selection)
        self._write("trace", trace.to_dict())
        return trace, apply_selection(scaled, trace)

    def _explain(self, model, trace, report):
        importance = feature_importance(model, self.cfg.importance_mode, trace)
        self._write("importance", importance.to_dict())
        self.artifacts["report_md"] = self.store.write_text(
            "report_md", render_report(trace, report, importance, self.cfg.top, "md")
        )
        self.artifacts["importance_csv"] = self.store.write_text(
            "importance_csv", importance_frame(importance, self.cfg.top).to_csv(index=False)
        )
        return importance

    def _metadata(self, finished: Optional[datetime], train_seconds: Optional[float]) -> Dict[str, Any]:
        return {
            "flowsieve_version": _package_version(),
            "config": self.cfg.to_dict(),
            "threads": self.threads,
            "started_at": self.started.isoformat(),
            "finished_at": None if finished is None else finished.isoformat(),
            "status": "running" if finished is None else "succeeded",
            "stage_seconds": dict(self.stage_seconds),
            "train_seconds": train_seconds,
        }


def run_pipeline(cfg: PipelineConfig, threads: int = DEFAULT_THREADS, dry_run: bool = False) -> PipelineResult:
    """
    Run the whole pipeline.

    Args:
        cfg: Resolved configuration
        threads: Worker cap
        dry_run: Only validate the configuration and inputs; read and write nothing

    Returns:
        PipelineResult: Artifacts and in-memory results

    Raises:
        ConfigError: Invalid configuration or missing inputs
        StageError: A stage failed; artifacts of earlier stages are kept
    """
    validate(cfg)
    digest = config_hash(cfg.to_dict())
    if dry_run:
        logger.info(f"Configuration valid (hash {digest[:12]}); dry run, nothing executed")
        return PipelineResult(config_hash=digest, dry_run=True)
    runner = PipelineRunner(cfg, threads)
    try:
        return runner.run()
    except StageError:
        if runner.store is not None:
            metadata = runner._metadata(datetime.now(timezone.utc), None)
            metadata["status"] = "failed"
            runner.store.write("metadata", metadata)
        raise
