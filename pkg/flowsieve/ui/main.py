import logging

import streamlit as st

from flowsieve.config import DASHBOARD_TITLE
from flowsieve.ui import components, state

logger = logging.getLogger(__name__)


def main():
    logger.info("Starting flowsieve dashboard")
    st.title(DASHBOARD_TITLE)
    st.write("Browse the artifacts of a pipeline run: selection, metrics and feature importance.")

    try:
        state.initialize_session_state()
        components.render_run_sidebar()

        run = state.load_run()
        if not run:
            st.info(f"No artifacts found in {st.session_state.run_dir!r}. Run `flowsieve pipeline` first.")
            return
        logger.debug(f"Loaded artifacts {sorted(run)} from {st.session_state.run_dir}")

        metadata = run.get("metadata")
        selection_tab, metrics_tab, importance_tab, run_tab = st.tabs(["Selection", "Metrics", "Importance", "Run"])
        with selection_tab:
            if "trace" in run:
                components.render_selection(run["trace"])
            else:
                st.info("No selection trace in this run.")
        with metrics_tab:
            if "eval_report" in run:
                components.render_metrics(run["eval_report"], metadata)
            else:
                st.info("Not evaluated.")
        with importance_tab:
            if "importance" in run:
                components.render_importance(run["importance"])
            else:
                st.info("No importance ranking (k-NN runs have none).")
        with run_tab:
            if metadata:
                components.render_metadata(metadata)
            else:
                st.info("No run metadata.")

    except Exception as e:
        logger.critical(f"Critical error in dashboard: {str(e)}", exc_info=True)
        st.error("An unexpected error occurred. Please try refreshing the page.")
