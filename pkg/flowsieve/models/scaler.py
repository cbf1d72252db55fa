"""
Models for z-score standardization parameters.
"""
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from flowsieve.config import SCHEMA_VERSION


@dataclass(frozen=True, eq=False)
class ScalerParams:
    """
    Per-feature mean and standard deviation fit on one dataset.

    Attributes:
        feature_names (Tuple[str, ...]): Features, in the order of the fitted dataset
        mean (np.ndarray): Per-feature arithmetic mean
        std (np.ndarray): Per-feature standard deviation (>= 0)
        ddof (int): 0 for population, 1 for sample standard deviation
        fit_fingerprint (str): Fingerprint of the dataset the params were fit on
    """
    feature_names: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    ddof: int = 0
    fit_fingerprint: str = ""

    @property
    def fingerprint(self) -> str:
        """Identity of these params, recorded on datasets they standardize."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScalerParams":
        features = data["features"]
        names = tuple(data.get("feature_order") or features)
        return cls(
            feature_names=names,
            mean=np.array([features[n]["mean"] for n in names], dtype=np.float64),
            std=np.array([features[n]["std"] for n in names], dtype=np.float64),
            ddof=int(data.get("ddof", 0)),
            fit_fingerprint=data.get("fit_fingerprint", ""),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "ddof": self.ddof,
            "fit_fingerprint": self.fit_fingerprint,
            "feature_order": list(self.feature_names),
            "features": {
                name: {"mean": float(m), "std": float(s)}
                for name, m, s in zip(self.feature_names, self.mean, self.std)
            },
        }
