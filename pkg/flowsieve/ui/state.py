"""
Streamlit session state management.
"""
import os
from pathlib import Path
from typing import Any, Dict

import streamlit as st

from flowsieve.config import DASHBOARD_RUN_DIR_ENV, DEFAULT_RUN_DIR
from flowsieve.services.run_service import RunService


def initialize_session_state():
    """Initialize or get session state variables."""
    if "run_dir" not in st.session_state:
        st.session_state.run_dir = os.environ.get(DASHBOARD_RUN_DIR_ENV, DEFAULT_RUN_DIR)

    # One service per session; it caches every run directory it has read
    if "run_service" not in st.session_state:
        st.session_state.run_service = RunService()


def set_run_dir(run_dir: str):
    """Point the dashboard at another run directory."""
    st.session_state.run_dir = run_dir


def load_run() -> Dict[str, Any]:
    """
    Parsed artifacts of the current run directory.

    Returns an empty dict when the directory does not exist.
    """
    return st.session_state.run_service.load(Path(st.session_state.run_dir))


def reload_run():
    st.session_state.run_service.forget(Path(st.session_state.run_dir))
