"""
Feature importance of tree models and the combined run report.
"""
import io
import json
import logging
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from flowsieve.config import DEFAULT_TOP_FEATURES, IMPORTANCE_MODES, REPORT_FORMATS
from flowsieve.errors import ConfigError, DataError, UnsupportedModelError
from flowsieve.models.classifier import LEAF, ClassifierModel, ForestModel, GbdtModel, KnnModel, TreeModel
from flowsieve.models.evaluation import EvalReport
from flowsieve.models.importance import ImportanceEntry, ImportanceReport
from flowsieve.models.selection import SelectionTrace

logger = logging.getLogger(__name__)

NO_SPLITS_NOTE = "The model made no splits: every feature has zero importance."


def _trees(model: ClassifierModel):
    if isinstance(model, TreeModel):
        return [model.tree]
    if isinstance(model, (ForestModel, GbdtModel)):
        return list(model.trees)
    if isinstance(model, KnnModel):
        raise UnsupportedModelError("feature importance is not defined for k-NN models")
    raise UnsupportedModelError(f"feature importance is not defined for model kind {model.kind!r}")


def feature_importance(
    model: ClassifierModel,
    mode: str = "gain",
    trace: Optional[SelectionTrace] = None,
) -> ImportanceReport:
    """
    Rank the model's features by total split gain or by split count.

    Gain is the Gini decrease (weighted by node rows) for trees and forests
    and the second-order split gain for the boosted ensemble. Features that
    are never split on get exactly 0.

    Args:
        model: Tree, forest or boosted model
        mode: "gain" or "weight"
        trace: Selection that chose the model's features; the report keeps its fingerprint

    Returns:
        ImportanceReport: Every feature, descending, ties by column index

    Raises:
        UnsupportedModelError: k-NN model
        DataError: ``trace`` selected other features than the model uses
    """
    if mode not in IMPORTANCE_MODES:
        raise ConfigError(f"importance mode must be one of {IMPORTANCE_MODES}, got {mode!r}")
    trees = _trees(model)
    if trace is not None and set(trace.a6) != set(model.feature_names):
        raise DataError("the model's features are not the trace's selected features")
    totals = np.zeros(model.n_features)
    for tree in trees:
        internal = tree.feature != LEAF
        contribution = tree.gain[internal] if mode == "gain" else np.ones(int(internal.sum()))
        np.add.at(totals, tree.feature[internal], contribution)

    total = float(totals.sum())
    order = sorted(range(model.n_features), key=lambda j: (-totals[j], j))
    entries = tuple(
        ImportanceEntry(
            feature=model.feature_names[j],
            index=j,
            importance=float(totals[j]),
            normalized=float(totals[j] / total) if total > 0 else 0.0,
        )
        for j in order
    )
    if total == 0:
        logger.warning(f"{model.kind} model has no splits; importances are all zero")
    return ImportanceReport(
        model_kind=model.kind,
        model_fingerprint=model.fingerprint(),
        mode=mode,
        entries=entries,
        total=total,
        trace_fingerprint=None if trace is None else trace.fingerprint(),
    )


def _fmt(value: Optional[float], digits: int = 5) -> str:
    return "undefined" if value is None else f"{value:.{digits}f}"


def build_report(
    trace: SelectionTrace,
    evaluation: Optional[EvalReport],
    imp: ImportanceReport,
    top: int,
) -> Dict[str, Any]:
    """
    The combined report as a JSON-ready dict.

    Raises:
        DataError: The model's features are not the selected features, or the
            importance report names another trace
    """
    if set(imp.feature_names) != set(trace.a6):
        raise DataError("importance features differ from the selected feature set")
    if imp.trace_fingerprint is not None and imp.trace_fingerprint != trace.fingerprint():
        raise DataError("importance report refers to a different selection trace")
    if top < 1:
        raise ConfigError(f"top must be >= 1, got {top}")
    selected = []
    for name in trace.a6:
        row = {"feature": name}
        if trace.table is not None:
            stats = trace.table.get(name)
            row.update(
                pearson=stats.pearson,
                spearman=stats.spearman,
                kendall=stats.kendall,
                info_gain=stats.info_gain,
            )
        selected.append(row)
    ranking = imp.top(top)
    return {
        "selected_features": selected,
        "thresholds": trace.to_dict()["thresholds"],
        "metrics": None if evaluation is None else evaluation.to_dict(include_timing=True),
        "importance": {
            "mode": imp.mode,
            "model_kind": imp.model_kind,
            "trace_fingerprint": imp.trace_fingerprint,
            "top": [e.to_dict() for e in ranking],
        },
        "chart": {"labels": [e.feature for e in ranking], "values": [e.normalized for e in ranking]},
        "notes": [] if imp.has_splits else [NO_SPLITS_NOTE],
    }


def _markdown_table(header: List[str], rows: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


def _render_markdown(data: Dict[str, Any], evaluation: Optional[EvalReport], top: int) -> str:
    lines = ["# Flow classification report", "", f"## Selected features ({len(data['selected_features'])})", ""]
    rows = [
        [
            s["feature"],
            _fmt(s.get("pearson")),
            _fmt(s.get("spearman")),
            _fmt(s.get("kendall")),
            _fmt(s.get("info_gain")),
        ]
        for s in data["selected_features"]
    ]
    lines += _markdown_table(["Feature", "Pearson", "Spearman", "Kendall", "Info gain"], rows)
    lines += ["", "Thresholds:", ""]
    lines += [f"- {name}: {_fmt(value)}" for name, value in data["thresholds"].items()]

    lines += ["", "## Metrics", ""]
    if evaluation is None:
        lines.append("Not evaluated.")
    else:
        frame = evaluation.to_frame()
        lines += _markdown_table(list(frame.columns), frame.astype(str).values.tolist())
    if evaluation is not None and evaluation.cv_fold_accuracies:
        folds = ", ".join(f"{a:.5f}" for a in evaluation.cv_fold_accuracies)
        lines += ["", f"Cross-validation accuracies: {folds}"]

    importance = data["importance"]
    lines += ["", f"## Feature importance (top {top}, {importance['mode']})", ""]
    if data["notes"]:
        lines += data["notes"]
    else:
        rows = [
            [str(rank), e["feature"], f"{e['importance']:.6g}", f"{e['normalized']:.4f}", "#" * round(40 * e["normalized"])]
            for rank, e in enumerate(importance["top"], start=1)
        ]
        lines += _markdown_table(["Rank", "Feature", "Importance", "Normalized", "Share"], rows)
    return "\n".join(lines) + "\n"


def importance_frame(imp: ImportanceReport, top: int) -> pd.DataFrame:
    """Top-N ranking as a table for plotting tools."""
    ranking = imp.top(top)
    return pd.DataFrame(
        {
            "rank": list(range(1, len(ranking) + 1)),
            "feature": [e.feature for e in ranking],
            "importance": [e.importance for e in ranking],
            "normalized": [e.normalized for e in ranking],
        }
    )


def render_report(
    trace: SelectionTrace,
    evaluation: Optional[EvalReport],
    imp: ImportanceReport,
    top: int = DEFAULT_TOP_FEATURES,
    fmt: str = "md",
) -> str:
    """
    Render the selection, metrics and top-N importance as one document.

    Args:
        trace: Selection trace of the run
        evaluation: Evaluation report of the model, if it was evaluated
        imp: Importance of the same model
        top: Ranking length
        fmt: "json", "md" or "csv" (the csv form holds the ranking only)

    Returns:
        str: The document text
    """
    if fmt not in REPORT_FORMATS:
        raise ConfigError(f"report format must be one of {REPORT_FORMATS}, got {fmt!r}")
    data = build_report(trace, evaluation, imp, top)
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buffer = io.StringIO()
        importance_frame(imp, top).to_csv(buffer, index=False)
        return buffer.getvalue()
    return _render_markdown(data, evaluation, top)
