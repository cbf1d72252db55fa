"""
Models for the three-step hybrid feature selection and its audit trace.
"""
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from flowsieve.config import DEFAULT_BINS, RANK_MEANS_SCOPES, SCHEMA_VERSION
from flowsieve.errors import ConfigError
from flowsieve.models.correlation import CorrelationTable

# Per-step verdicts recorded on each feature
PEARSON_POSITIVE = "pearson_positive"
PEARSON_NEGATIVE = "pearson_negative"
PEARSON_BELOW = "pearson_below_threshold"
PEARSON_NEUTRAL = "pearson_zero_or_undefined"
RANK_POSITIVE = "rank_positive"
RANK_NEGATIVE = "rank_negative"
RANK_BELOW = "rank_below_threshold"
RANK_NEUTRAL = "rank_zero_or_undefined"

SELECTED = "selected"
REJECTED_CORRELATION = "rejected_correlation"
REJECTED_INFO_GAIN = "rejected_info_gain"


@dataclass(frozen=True)
class SelectionConfig:
    """
    Options of the hybrid selector.

    Attributes:
        bins (int): Equal-frequency bins for information gain (>= 2)
        inclusive_positive (bool): Positive thresholds use >= instead of >
        inclusive_negative (bool): Negative thresholds use <= instead of <
        ig_strict (bool): Information gain must be strictly above its mean
        rank_means_scope (str): "a2" computes the rank-step means over a2 only, "all" over every feature
    """
    bins: int = DEFAULT_BINS
    inclusive_positive: bool = True
    inclusive_negative: bool = True
    ig_strict: bool = True
    rank_means_scope: str = "a2"

    def __post_init__(self):
        if not isinstance(self.bins, int) or self.bins < 2:
            raise ConfigError(f"bins must be an integer >= 2, got {self.bins!r}")
        if self.rank_means_scope not in RANK_MEANS_SCOPES:
            raise ConfigError(f"rank_means_scope must be one of {RANK_MEANS_SCOPES}, got {self.rank_means_scope!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bins": self.bins,
            "inclusive_positive": self.inclusive_positive,
            "inclusive_negative": self.inclusive_negative,
            "ig_strict": self.ig_strict,
            "rank_means_scope": self.rank_means_scope,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectionConfig":
        known = cls().to_dict()
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown selection options: {sorted(unknown)}")
        return cls(**{**known, **data})


@dataclass(frozen=True)
class PearsonStep:
    """Outcome of the Pearson step: a1 admitted, a2 left for the rank step."""
    a1: Tuple[str, ...]
    a2: Tuple[str, ...]
    mu_pos: Optional[float]
    mu_neg: Optional[float]
    verdicts: Dict[str, str]


@dataclass(frozen=True)
class RankStep:
    """Outcome of the Spearman/Kendall rescue step over a2."""
    a3: Tuple[str, ...]
    mu_spearman_pos: Optional[float]
    mu_spearman_neg: Optional[float]
    mu_kendall_pos: Optional[float]
    mu_kendall_neg: Optional[float]
    mu_sk_pos: Optional[float]
    mu_sk_neg: Optional[float]
    scores: Dict[str, Optional[float]]
    verdicts: Dict[str, str]


@dataclass(frozen=True)
class InfoGainStep:
    """Outcome of the information gain step over all features."""
    a5: Tuple[str, ...]
    mu_ig: Optional[float]


@dataclass(frozen=True)
class FeatureDecision:
    """
    Audit record of one feature.

    Attributes:
        feature (str): Feature name
        pearson_verdict (str): Verdict of the Pearson step
        rank_verdict (Optional[str]): Verdict of the rank step, None when a1 admitted the feature
        rank_score (Optional[float]): (spearman + kendall) / 2, when evaluated
        info_gain_pass (bool): Whether the feature is in a5
        outcome (str): "selected", "rejected_correlation" or "rejected_info_gain"
    """
    feature: str
    pearson_verdict: str
    rank_verdict: Optional[str]
    rank_score: Optional[float]
    info_gain_pass: bool
    outcome: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature,
            "pearson_verdict": self.pearson_verdict,
            "rank_verdict": self.rank_verdict,
            "rank_score": self.rank_score,
            "info_gain_pass": self.info_gain_pass,
            "outcome": self.outcome,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FeatureDecision":
        return cls(
            feature=data["feature"],
            pearson_verdict=data["pearson_verdict"],
            rank_verdict=data.get("rank_verdict"),
            rank_score=data.get("rank_score"),
            info_gain_pass=bool(data["info_gain_pass"]),
            outcome=data["outcome"],
        )


MU_FIELDS = (
    "mu_pearson_pos",
    "mu_pearson_neg",
    "mu_spearman_pos",
    "mu_spearman_neg",
    "mu_kendall_pos",
    "mu_kendall_neg",
    "mu_sk_pos",
    "mu_sk_neg",
    "mu_ig",
)
SET_FIELDS = ("a1", "a2", "a3", "a4", "a5", "a6")


@dataclass(frozen=True)
class SelectionTrace:
    """
    Every set, threshold and per-feature decision of one selection run.

    Sets keep the original feature order. Thresholds are None when the set
    they average over is empty.

    Attributes:
        features (Tuple[str, ...]): All input features
        a1 .. a6 (Tuple[str, ...]): The selection sets; a6 is the selected list
        mu_* (Optional[float]): The thresholds
        decisions (Tuple[FeatureDecision, ...]): One record per feature
        config (SelectionConfig): Options the run used
        table (Optional[CorrelationTable]): The statistics the sets were derived from
    """
    features: Tuple[str, ...]
    a1: Tuple[str, ...]
    a2: Tuple[str, ...]
    a3: Tuple[str, ...]
    a4: Tuple[str, ...]
    a5: Tuple[str, ...]
    a6: Tuple[str, ...]
    mu_pearson_pos: Optional[float] = None
    mu_pearson_neg: Optional[float] = None
    mu_spearman_pos: Optional[float] = None
    mu_spearman_neg: Optional[float] = None
    mu_kendall_pos: Optional[float] = None
    mu_kendall_neg: Optional[float] = None
    mu_sk_pos: Optional[float] = None
    mu_sk_neg: Optional[float] = None
    mu_ig: Optional[float] = None
    decisions: Tuple[FeatureDecision, ...] = ()
    config: SelectionConfig = field(default_factory=SelectionConfig)
    table: Optional[CorrelationTable] = None

    @property
    def selected(self) -> List[str]:
        return list(self.a6)

    def decision(self, feature: str) -> FeatureDecision:
        for record in self.decisions:
            if record.feature == feature:
                return record
        raise KeyError(feature)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "features": list(self.features)}
        data.update({name: list(getattr(self, name)) for name in SET_FIELDS})
        data["thresholds"] = {name: getattr(self, name) for name in MU_FIELDS}
        data["decisions"] = [d.to_dict() for d in self.decisions]
        data["config"] = self.config.to_dict()
        data["statistics"] = None if self.table is None else self.table.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SelectionTrace":
        thresholds = data.get("thresholds", {})
        return cls(
            features=tuple(data["features"]),
            **{name: tuple(data[name]) for name in SET_FIELDS},
            **{name: thresholds.get(name) for name in MU_FIELDS},
            decisions=tuple(FeatureDecision.from_dict(d) for d in data.get("decisions", [])),
            config=SelectionConfig.from_dict(data.get("config", {})),
            table=CorrelationTable.from_dict(data["statistics"]) if data.get("statistics") else None,
        )

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form; importance reports refer to a trace by it."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
