"""
Streamlit entry for the run-report dashboard.

    streamlit run flowsieve/dashboard.py

The run directory defaults to ``$FLOWSIEVE_RUN_DIR`` or ``flowsieve-run``.
"""
import logging

from flowsieve.config import LOG_FORMAT
from flowsieve.ui.main import main

logging.basicConfig(
    level=logging.WARNING,
    format=LOG_FORMAT,
    handlers=[logging.StreamHandler()],
)
logging.getLogger("flowsieve").setLevel(logging.INFO)

if __name__ == "__main__":
    main()
