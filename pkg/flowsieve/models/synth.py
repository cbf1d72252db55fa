"""
Models for synthetic flow-like datasets.
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

from flowsieve.config import DEFAULT_SEPARATION, SCHEMA_VERSION
from flowsieve.errors import ConfigError
from flowsieve.models.dataset import Dataset


@dataclass(frozen=True)
class SynthSpec:
    """
    Recipe of a synthetic dataset.

    Attributes:
        n_rows (int): Rows to generate (>= 10)
        n_informative (int): Features whose mean depends on the class
        n_noise (int): Features independent of the class
        imbalance (float): Fraction of attack rows, in (0, 1)
        label_noise (float): Fraction of labels flipped after generation, in [0, 1)
        separation (float): Distance between class means in standard deviations
        seed (int): Generator seed
    """
    n_rows: int
    n_informative: int
    n_noise: int
    imbalance: float = 0.5
    label_noise: float = 0.0
    separation: float = DEFAULT_SEPARATION
    seed: int = 0

    def __post_init__(self):
        if self.n_rows < 10:
            raise ConfigError(f"n_rows must be >= 10, got {self.n_rows}")
        if self.n_informative < 0 or self.n_noise < 0:
            raise ConfigError("feature counts must be non-negative")
        if self.n_informative + self.n_noise == 0:
            raise ConfigError("at least one feature is required")
        if not 0.0 < self.imbalance < 1.0:
            raise ConfigError(f"imbalance must be in (0, 1), got {self.imbalance}")
        if not 0.0 <= self.label_noise < 1.0:
            raise ConfigError(f"label_noise must be in [0, 1), got {self.label_noise}")
        if self.separation < 0:
            raise ConfigError(f"separation must be >= 0, got {self.separation}")
        attack_rows = round(self.n_rows * self.imbalance)
        if attack_rows < 1 or attack_rows > self.n_rows - 1:
            raise ConfigError(f"imbalance {self.imbalance} leaves a class empty at {self.n_rows} rows")

    @property
    def attack_rows(self) -> int:
        return round(self.n_rows * self.imbalance)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_rows": self.n_rows,
            "n_informative": self.n_informative,
            "n_noise": self.n_noise,
            "imbalance": self.imbalance,
            "label_noise": self.label_noise,
            "separation": self.separation,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SynthSpec":
        return cls(**data)


@dataclass(frozen=True)
class SynthResult:
    """
    A generated dataset and what it was built from.

    Attributes:
        dataset (Dataset): The labelled dataset
        informative (Tuple[str, ...]): Names of the informative features
        noise (Tuple[str, ...]): Names of the noise features
        shifts (Tuple[float, ...]): Attack-class mean of each informative feature
        flipped (int): Labels flipped by label noise
        spec (SynthSpec): The recipe
    """
    dataset: Dataset
    informative: Tuple[str, ...]
    noise: Tuple[str, ...]
    shifts: Tuple[float, ...]
    flipped: int
    spec: SynthSpec

    def ground_truth(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "spec": self.spec.to_dict(),
            "informative": list(self.informative),
            "noise": list(self.noise),
            "attack_means": dict(zip(self.informative, self.shifts)),
            "flipped_labels": self.flipped,
            "class_counts": self.dataset.class_counts(),
        }
