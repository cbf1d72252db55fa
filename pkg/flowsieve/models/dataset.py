"""
Models for flow tables before and after cleaning.
"""
import hashlib
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from flowsieve.errors import ConfigError, DataError


@dataclass(frozen=True)
class LoadReport:
    """
    Cleaning report accumulated while a table moves through ingestion.

    Attributes:
        rows_in (int): Rows read from the CSV files
        rows_dropped (int): Rows removed by cleaning and label mapping
        per_class_counts (Dict[str, int]): Rows per class after binarization
        warnings (Tuple[str, ...]): Non-fatal findings, in the order they occurred
        renamed_columns (Dict[str, str]): Deduplicated header -> original header
    """
    rows_in: int = 0
    rows_dropped: int = 0
    per_class_counts: Dict[str, int] = field(default_factory=dict)
    warnings: Tuple[str, ...] = ()
    renamed_columns: Dict[str, str] = field(default_factory=dict)

    def with_warning(self, message: str) -> "LoadReport":
        return replace(self, warnings=self.warnings + (message,))

    def with_dropped(self, count: int) -> "LoadReport":
        return replace(self, rows_dropped=self.rows_dropped + count)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rows_in": self.rows_in,
            "rows_dropped": self.rows_dropped,
            "per_class_counts": dict(self.per_class_counts),
            "warnings": list(self.warnings),
            "renamed_columns": dict(self.renamed_columns),
        }


@dataclass(frozen=True)
class RawTable:
    """
    A pre-cleaning flow table.

    Numeric columns hold float64 values (NaN for missing cells, ±inf kept);
    text columns hold Python strings. Column names are unique and every column
    has ``row_count`` entries, both guaranteed by the DataFrame.

    Attributes:
        frame (pd.DataFrame): The table, columns in file order
        report (LoadReport): What happened to the table so far
    """
    frame: pd.DataFrame
    report: LoadReport = field(default_factory=LoadReport)

    def __post_init__(self):
        if not self.frame.columns.is_unique:
            raise DataError("column names must be unique")

    @property
    def column_names(self) -> List[str]:
        return [str(c) for c in self.frame.columns]

    @property
    def row_count(self) -> int:
        return len(self.frame)

    @property
    def numeric_columns(self) -> List[str]:
        return [c for c in self.column_names if pd.api.types.is_float_dtype(self.frame[c])]

    @property
    def text_columns(self) -> List[str]:
        return [c for c in self.column_names if not pd.api.types.is_float_dtype(self.frame[c])]

    def is_numeric(self, name: str) -> bool:
        return pd.api.types.is_float_dtype(self.frame[name])


@dataclass(frozen=True)
class LabelRule:
    """
    Maps raw label strings to the binary target.

    Attributes:
        benign_labels (FrozenSet[str]): Labels mapped to 0
        attack_labels (FrozenSet[str]): Labels mapped to 1
        attack_prefixes (Tuple[str, ...]): Label prefixes mapped to 1
        unknown_policy (str): "drop" or "error" for labels matching neither side
    """
    benign_labels: FrozenSet[str]
    attack_labels: FrozenSet[str] = frozenset()
    attack_prefixes: Tuple[str, ...] = ()
    unknown_policy: str = "drop"

    def __post_init__(self):
        if self.unknown_policy not in ("drop", "error"):
            raise ConfigError(f"unknown_policy must be 'drop' or 'error', got {self.unknown_policy!r}")
        overlap = set(self.benign_labels & self.attack_labels)
        overlap.update(b for b in self.benign_labels if self.classify_attack(b))
        if overlap:
            raise ConfigError(f"labels are both benign and attack: {sorted(overlap)}")

    def classify(self, label: str) -> Optional[int]:
        """
        Map a single label.

        Returns:
            Optional[int]: 0, 1, or None when the label matches neither side
        """
        if label in self.benign_labels:
            return 0
        if self.classify_attack(label):
            return 1
        return None

    def classify_attack(self, label: str) -> bool:
        return label in self.attack_labels or any(label.startswith(p) for p in self.attack_prefixes)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LabelRule":
        return cls(
            benign_labels=frozenset(data.get("benign_labels", [])),
            attack_labels=frozenset(data.get("attack_labels", [])),
            attack_prefixes=tuple(data.get("attack_prefixes", [])),
            unknown_policy=data.get("unknown_policy", "drop"),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "benign_labels": sorted(self.benign_labels),
            "attack_labels": sorted(self.attack_labels),
            "attack_prefixes": list(self.attack_prefixes),
            "unknown_policy": self.unknown_policy,
        }


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    A clean numeric dataset: every stage after ingestion consumes and produces these.

    Attributes:
        feature_names (Tuple[str, ...]): Unique feature names, in column order
        X (np.ndarray): Finite float64 matrix, rows x features (read-only)
        y (Optional[np.ndarray]): Binary labels (0 = benign, 1 = DoS/DDoS), or None when unlabeled
        scaled_with (Optional[str]): Fingerprint of the scaler params applied, if any
    """
    feature_names: Tuple[str, ...]
    X: np.ndarray
    y: Optional[np.ndarray] = None
    scaled_with: Optional[str] = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        object.__setattr__(self, "feature_names", names)
        X = np.array(self.X, dtype=np.float64, copy=True)
        if X.ndim != 2:
            X = X.reshape(len(X), -1) if X.size else np.zeros((len(X), len(names)))
        if X.shape[1] != len(names):
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        if not np.isfinite(X).all():
            raise DataError("feature matrix contains NaN or infinite values")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = np.asarray(self.y)
            if y.shape != (X.shape[0],):
                raise DataError(f"{y.shape[0] if y.ndim else 0} labels for {X.shape[0]} rows")
            if y.size and not np.isin(y, (0, 1)).all():
                raise DataError("labels must be 0 or 1")
            y = y.astype(np.int8)
            y.setflags(write=False)
            object.__setattr__(self, "y", y)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.y is not None

    def require_labels(self) -> np.ndarray:
        if self.y is None:
            raise DataError("dataset has no labels")
        return self.y

    def class_counts(self) -> Dict[str, int]:
        """Per-class row counts as {"benign": n0, "attack": n1}."""
        y = self.require_labels()
        n_attack = int(y.sum())
        return {"benign": int(y.size - n_attack), "attack": n_attack}

    def require_both_classes(self) -> None:
        counts = self.class_counts()
        if min(counts.values()) == 0:
            raise DataError(f"both classes required, got {counts}")

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]

    def subset_rows(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            feature_names=self.feature_names,
            X=self.X[rows],
            y=None if self.y is None else self.y[rows],
            scaled_with=self.scaled_with,
        )

    def subset_features(self, names: Sequence[str]) -> "Dataset":
        missing = [n for n in names if n not in self.feature_names]
        if missing:
            raise DataError(f"unknown features: {missing}")
        columns = [self.feature_names.index(n) for n in names]
        return Dataset(
            feature_names=tuple(names),
            X=self.X[:, columns],
            y=self.y,
            scaled_with=self.scaled_with,
        )

    def fingerprint(self) -> str:
        """SHA-256 over feature names, matrix bytes and labels."""
        digest = hashlib.sha256()
        digest.update("\x1f".join(self.feature_names).encode("utf-8"))
        digest.update(np.ascontiguousarray(self.X).tobytes())
        if self.y is not None:
            digest.update(np.ascontiguousarray(self.y).tobytes())
        return digest.hexdigest()

    def header(self) -> Dict[str, Any]:
        return {
            "n_rows": self.n_rows,
            "n_features": self.n_features,
            "feature_names": list(self.feature_names),
            "has_labels": self.has_labels,
            "scaled_with": self.scaled_with,
        }
