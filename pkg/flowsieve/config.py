"""
Defaults and constants for flowsieve.

Pipeline defaults, CSV ingestion rules, artifact file names and the selection
tolerance. A run's resolved configuration starts from the values defined here.
"""
from typing import Any, Dict, List

# Artifact formats
SCHEMA_VERSION = 1
DATASET_FORMAT = "flowsieve-dataset"
DATASET_FORMAT_VERSION = 1
DATASET_FILE_SUFFIX = ".npz"

# Logging
LOG_FORMAT = "%(levelname)s | %(name)s | %(message)s"
DEFAULT_LOG_LEVEL = "INFO"

# CSV ingestion
CSV_CHUNK_ROWS = 100_000
MISSING_TOKENS = frozenset({"", "NaN", "nan", "NAN", "-nan", "null", "NULL"})
INFINITY_TOKENS: Dict[str, float] = {
    "Infinity": float("inf"),
    "+Infinity": float("inf"),
    "-Infinity": float("-inf"),
    "infinity": float("inf"),
    "-infinity": float("-inf"),
    "inf": float("inf"),
    "+inf": float("inf"),
    "-inf": float("-inf"),
    "Inf": float("inf"),
    "-Inf": float("-inf"),
    "∞": float("inf"),
    "+∞": float("inf"),
    "-∞": float("-inf"),
}

# Dataset profiles: label rule, label column and identifier columns to drop
DATASET_PROFILES: Dict[str, Dict[str, Any]] = {
    "cic-ids2017": {
        "label_column": "Label",
        "drop_columns": ["Flow ID", "Source IP", "Destination IP", "Timestamp"],
        "rule": {
            "benign_labels": ["BENIGN"],
            "attack_labels": ["DDoS"],
            "attack_prefixes": [],
            "unknown_policy": "drop",
        },
    },
    "cic-iot2023": {
        "label_column": "label",
        "drop_columns": [],
        "rule": {
            "benign_labels": ["BenignTraffic"],
            "attack_labels": [],
            "attack_prefixes": ["DDoS-", "DoS-"],
            "unknown_policy": "drop",
        },
    },
}
CUSTOM_PROFILE = "custom"
PROFILE_NAMES: List[str] = sorted(DATASET_PROFILES) + [CUSTOM_PROFILE]

# Scaling
DEFAULT_SCALER_DDOF = 0
SCALE_FIT_ON_OPTIONS = ("all", "train")
DEFAULT_SCALE_FIT_ON = "all"

# Feature selection
DEFAULT_BINS = 10
RANK_MEANS_SCOPES = ("a2", "all")
# Relative slack when a statistic is compared against a class mean; statistics
# within it of zero count as zero
SELECTION_TOLERANCE = 1e-12

# Evaluation
DEFAULT_TEST_FRACTION = 0.3
DEFAULT_CV_FOLDS = 5
MSE_MODES = ("hard", "brier")
DECISION_THRESHOLD = 0.5

# Classifier defaults, pinned to the usual library defaults
MODEL_KINDS = ("tree", "forest", "gbdt", "knn")
DEFAULT_MODEL_KIND = "gbdt"
TREE_DEFAULTS: Dict[str, Any] = {"max_depth": None, "min_samples_leaf": 1}
FOREST_DEFAULTS: Dict[str, Any] = {
    "n_trees": 100,
    "max_depth": None,
    "min_samples_leaf": 1,
    "mtry": None,  # None -> floor(sqrt(p))
    "bootstrap": True,
}
GBDT_DEFAULTS: Dict[str, Any] = {
    "rounds": 100,
    "learning_rate": 0.3,
    "max_depth": 6,
    "l2_lambda": 1.0,
    "min_child_weight": 1.0,
    "subsample": 1.0,
    "colsample": 1.0,
}
KNN_DEFAULTS: Dict[str, Any] = {"k": 5}
KNN_QUERY_BLOCK_CELLS = 4_000_000  # query rows x training rows per distance block
LOSS_INCREASE_TOLERANCE = 1e-9

# Explainability
IMPORTANCE_MODES = ("gain", "weight")
DEFAULT_TOP_FEATURES = 20
REPORT_FORMATS = ("json", "md", "csv")

# Synthetic data
DEFAULT_SEPARATION = 6.0

# Dashboard
DEFAULT_RUN_DIR = "flowsieve-run"
DASHBOARD_TITLE = "flowsieve run report"
DASHBOARD_RUN_DIR_ENV = "FLOWSIEVE_RUN_DIR"

# Concurrency
DEFAULT_THREADS = 1

# Pipeline artifacts
ARTIFACT_NAMES: Dict[str, str] = {
    "dataset": "dataset.npz",
    "ingest_report": "ingest_report.json",
    "scaler": "scaler.json",
    "trace": "trace.json",
    "model": "model.json",
    "eval_report": "eval_report.json",
    "importance": "importance.json",
    "report_md": "report.md",
    "importance_csv": "importance.csv",
    "metadata": "run_metadata.json",
}
# First line of text artifacts, by suffix; {} is the config hash
TEXT_HASH_LINES: Dict[str, str] = {".md": "<!-- config_hash: {} -->", ".csv": "# config_hash: {}"}

# Exit codes
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_TRAINING_ERROR = 4
