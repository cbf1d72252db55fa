"""
Reusable UI components for the run-report dashboard.
"""
from typing import Any, Dict, Optional

import pandas as pd
import streamlit as st

from flowsieve.config import DEFAULT_TOP_FEATURES
from flowsieve.models.evaluation import EvalReport
from flowsieve.models.importance import ImportanceReport
from flowsieve.models.selection import MU_FIELDS, SET_FIELDS, SelectionTrace
from flowsieve.services.evaluation_service import report_summary
from flowsieve.services.explain_service import importance_frame
from flowsieve.ui import state

SET_LABELS = {
    "a1": "a1: Pearson admitted",
    "a2": "a2: left for the rank step",
    "a3": "a3: rank step rescued",
    "a4": "a4: correlated (a1 + a3)",
    "a5": "a5: above mean information gain",
    "a6": "a6: selected (a4 and a5)",
}


def render_run_sidebar() -> None:
    """
    Render the run directory picker in the sidebar.

    Updates the session state with the chosen directory.
    """
    with st.sidebar:
        st.header("Run")
        run_dir = st.text_input("Run directory", value=st.session_state.run_dir)
        state.set_run_dir(run_dir)
        if st.button("Reload"):
            state.reload_run()
            st.rerun()


def render_metrics(report: EvalReport, metadata: Optional[Dict[str, Any]]) -> None:
    """
    Render the evaluation table and headline numbers.

    Training time lives in the run metadata, not in the evaluation artifact.
    """
    st.subheader("Metrics")
    train_seconds = None if metadata is None else metadata.get("train_seconds")
    if report.train_seconds is None and train_seconds is not None:
        report = EvalReport.from_dict({**report.to_dict(), "train_seconds": train_seconds})

    summary = report_summary(report)
    columns = st.columns(len(summary))
    for column, (name, value) in zip(columns, summary.items()):
        column.metric(name.replace("_", " "), f"{value:.5f}")
    st.table(report.to_frame())

    cm = report.confusion
    st.caption(f"Confusion: TP {cm.tp}, TN {cm.tn}, FP {cm.fp}, FN {cm.fn}")
    if report.metrics.degenerate:
        st.warning(f"Zero denominators (reported as 0): {', '.join(report.metrics.degenerate)}")
    if report.cv_fold_accuracies:
        st.line_chart(pd.DataFrame({"accuracy": list(report.cv_fold_accuracies)}, index=range(1, len(report.cv_fold_accuracies) + 1)))


def render_selection(trace: SelectionTrace) -> None:
    """
    Render the selection sets, thresholds and per-feature decisions.

    Args:
        trace: Selection trace of the run
    """
    st.subheader(f"Feature selection: {len(trace.a6)} of {len(trace.features)} features")
    for name in SET_FIELDS:
        members = getattr(trace, name)
        with st.expander(f"{SET_LABELS[name]} ({len(members)})", expanded=name == "a6"):
            st.write(", ".join(members) if members else "empty")

    thresholds = pd.DataFrame(
        {"threshold": list(MU_FIELDS), "value": [getattr(trace, name) for name in MU_FIELDS]}
    )
    st.dataframe(thresholds, hide_index=True)

    decisions = pd.DataFrame([d.to_dict() for d in trace.decisions])
    if trace.table is not None and not decisions.empty:
        decisions = decisions.merge(trace.table.to_frame(), on="feature", how="left")
    with st.expander("Per-feature decisions", expanded=False):
        st.dataframe(decisions, hide_index=True)


def render_importance(importance: ImportanceReport) -> None:
    """Render the top-N importance ranking as a bar chart."""
    st.subheader(f"Feature importance ({importance.mode})")
    if not importance.has_splits:
        st.info("The model made no splits: every feature has zero importance.")
        return
    ranked = len(importance.top(len(importance.entries)))
    top = ranked
    if ranked > 1:
        top = st.slider("Features shown", 1, ranked, min(DEFAULT_TOP_FEATURES, ranked))
    frame = importance_frame(importance, top)
    st.bar_chart(frame.set_index("feature")["normalized"])
    st.dataframe(frame, hide_index=True)


def render_metadata(metadata: Dict[str, Any]) -> None:
    st.subheader("Run metadata")
    status = metadata.get("status", "unknown")
    if status == "failed":
        st.error("The run failed; later artifacts may be missing or stale.")
    st.write(f"Status: **{status}**, started {metadata.get('started_at')}, finished {metadata.get('finished_at')}")
    stages = metadata.get("stage_seconds") or {}
    if stages:
        st.dataframe(pd.DataFrame({"stage": list(stages), "seconds": list(stages.values())}), hide_index=True)
    with st.expander("Resolved configuration", expanded=False):
        st.json(metadata.get("config", {}))
