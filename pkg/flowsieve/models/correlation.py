"""
Models for per-feature association statistics against the label.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from flowsieve.config import SCHEMA_VERSION

CSV_COLUMNS = ["feature", "pearson", "spearman", "kendall", "info_gain"]


@dataclass(frozen=True)
class FeatureStats:
    """
    Statistics of one feature against the binary label.

    Attributes:
        name (str): Feature name
        pearson (Optional[float]): Point-biserial Pearson r, None when undefined
        spearman (Optional[float]): Spearman rho over average ranks, None when undefined
        kendall (Optional[float]): Kendall tau-b, None when undefined
        info_gain (float): Information gain in bits, in [0, H(y)]
    """
    name: str
    pearson: Optional[float]
    spearman: Optional[float]
    kendall: Optional[float]
    info_gain: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.name,
            "pearson": self.pearson,
            "spearman": self.spearman,
            "kendall": self.kendall,
            "info_gain": self.info_gain,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureStats":
        return cls(
            name=data["feature"],
            pearson=data.get("pearson"),
            spearman=data.get("spearman"),
            kendall=data.get("kendall"),
            info_gain=float(data["info_gain"]),
        )


@dataclass(frozen=True)
class CorrelationTable:
    """
    Statistics for every feature of a dataset, in feature order.

    Attributes:
        rows (Tuple[FeatureStats, ...]): One entry per feature
        label_entropy (float): H(y) in bits, the upper bound of every info_gain
        bins (int): Equal-frequency bin count used for information gain
    """
    rows: Tuple[FeatureStats, ...]
    label_entropy: float
    bins: int

    @property
    def feature_names(self) -> List[str]:
        return [r.name for r in self.rows]

    def get(self, name: str) -> FeatureStats:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "label_entropy": self.label_entropy,
            "bins": self.bins,
            "features": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CorrelationTable":
        return cls(
            rows=tuple(FeatureStats.from_dict(r) for r in data["features"]),
            label_entropy=float(data["label_entropy"]),
            bins=int(data["bins"]),
        )

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with undefined statistics as empty cells."""
        return pd.DataFrame([r.to_dict() for r in self.rows], columns=CSV_COLUMNS)
