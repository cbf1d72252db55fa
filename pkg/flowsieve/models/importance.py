"""
Models for feature importance rankings.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from flowsieve.config import SCHEMA_VERSION


@dataclass(frozen=True)
class ImportanceEntry:
    """
    Importance of one feature.

    Attributes:
        feature (str): Feature name
        index (int): Column index in the model
        importance (float): Total split gain (or split count) on the feature
        normalized (float): importance / total, 0 when the model never split
    """
    feature: str
    index: int
    importance: float
    normalized: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature,
            "index": self.index,
            "importance": self.importance,
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ImportanceEntry":
        return cls(
            feature=data["feature"],
            index=int(data["index"]),
            importance=float(data["importance"]),
            normalized=float(data["normalized"]),
        )


@dataclass(frozen=True)
class ImportanceReport:
    """
    Every model feature ranked by importance, descending, ties by column index.

    Attributes:
        model_kind (str): Kind of the explained model
        model_fingerprint (str): Fingerprint of the explained model
        mode (str): "gain" or "weight"
        entries (Tuple[ImportanceEntry, ...]): One entry per model feature
        total (float): Sum of all importances
        trace_fingerprint (Optional[str]): Fingerprint of the selection trace that chose the model's features
    """
    model_kind: str
    model_fingerprint: str
    mode: str
    entries: Tuple[ImportanceEntry, ...]
    total: float
    trace_fingerprint: Optional[str] = None

    @property
    def feature_names(self) -> List[str]:
        return [e.feature for e in self.entries]

    @property
    def has_splits(self) -> bool:
        return self.total > 0

    def top(self, n: int) -> List[ImportanceEntry]:
        """The first ``n`` entries with nonzero importance."""
        return [e for e in self.entries if e.importance > 0][:n]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "model_kind": self.model_kind,
            "model_fingerprint": self.model_fingerprint,
            "mode": self.mode,
            "total": self.total,
            "trace_fingerprint": self.trace_fingerprint,
            "ranking": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ImportanceReport":
        return cls(
            model_kind=data["model_kind"],
            model_fingerprint=data.get("model_fingerprint", ""),
            mode=data.get("mode", "gain"),
            entries=tuple(ImportanceEntry.from_dict(e) for e in data["ranking"]),
            total=float(data["total"]),
            trace_fingerprint=data.get("trace_fingerprint"),
        )
