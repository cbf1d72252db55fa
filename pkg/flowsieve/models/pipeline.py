"""
Models for end-to-end pipeline runs.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from flowsieve.config import (
    DEFAULT_CV_FOLDS,
    DEFAULT_MODEL_KIND,
    DEFAULT_RUN_DIR,
    DEFAULT_SCALE_FIT_ON,
    DEFAULT_SCALER_DDOF,
    DEFAULT_TEST_FRACTION,
    DEFAULT_TOP_FEATURES,
    IMPORTANCE_MODES,
    MSE_MODES,
    PROFILE_NAMES,
    SCALE_FIT_ON_OPTIONS,
)
from flowsieve.errors import ConfigError
from flowsieve.models.classifier import ModelSpec
from flowsieve.models.evaluation import EvalReport
from flowsieve.models.importance import ImportanceReport
from flowsieve.models.selection import SelectionConfig, SelectionTrace


@dataclass(frozen=True)
class PipelineConfig:
    """
    Fully resolved configuration of one pipeline run.

    Attributes:
        inputs (Tuple[str, ...]): Flow CSV files, or a single ``.npz`` dataset
        seed (int): Seed for splitting, folds and model randomness (mandatory)
        output_dir (str): Directory receiving the artifacts
        profile (str): Dataset profile name
        rules (Optional[Dict[str, Any]]): Label rule for the "custom" profile
        label_column (Optional[str]): Overrides the profile's label column
        drop_columns (Optional[Tuple[str, ...]]): Overrides the profile's drop list
        scale (bool): Standardize features before selection
        scale_fit_on (str): "all" rows or the "train" split only
        ddof (int): 0 for population, 1 for sample standard deviation
        selection (SelectionConfig): Hybrid selector options
        model (ModelSpec): Model kind and hyperparameters (its seed is ``seed``)
        test_fraction (float): Held-out fraction
        cv_folds (int): Cross-validation folds; 0 skips cross-validation
        mse_mode (str): "hard" or "brier"
        importance_mode (str): "gain" or "weight"
        top (int): Importance ranking length in the report
    """
    inputs: Tuple[str, ...]
    seed: int
    output_dir: str = DEFAULT_RUN_DIR
    profile: str = "custom"
    rules: Optional[Dict[str, Any]] = None
    label_column: Optional[str] = None
    drop_columns: Optional[Tuple[str, ...]] = None
    scale: bool = True
    scale_fit_on: str = DEFAULT_SCALE_FIT_ON
    ddof: int = DEFAULT_SCALER_DDOF
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    model: ModelSpec = field(default_factory=lambda: ModelSpec(kind=DEFAULT_MODEL_KIND))
    test_fraction: float = DEFAULT_TEST_FRACTION
    cv_folds: int = DEFAULT_CV_FOLDS
    mse_mode: str = "hard"
    importance_mode: str = "gain"
    top: int = DEFAULT_TOP_FEATURES

    def __post_init__(self):
        if not self.inputs:
            raise ConfigError("at least one input file is required")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.profile not in PROFILE_NAMES:
            raise ConfigError(f"unknown profile {self.profile!r}, expected one of {PROFILE_NAMES}")
        if self.scale_fit_on not in SCALE_FIT_ON_OPTIONS:
            raise ConfigError(f"scale_fit_on must be one of {SCALE_FIT_ON_OPTIONS}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.cv_folds == 1 or self.cv_folds < 0:
            raise ConfigError(f"cv_folds must be 0 (skip) or >= 2, got {self.cv_folds}")
        if self.mse_mode not in MSE_MODES:
            raise ConfigError(f"mse_mode must be one of {MSE_MODES}")
        if self.importance_mode not in IMPORTANCE_MODES:
            raise ConfigError(f"importance_mode must be one of {IMPORTANCE_MODES}")
        if self.top < 1:
            raise ConfigError(f"top must be >= 1, got {self.top}")
        if self.model.seed != self.seed:
            object.__setattr__(self, "model", ModelSpec(kind=self.model.kind, params=self.model.params, seed=self.seed))

    @property
    def input_paths(self) -> List[Path]:
        return [Path(p) for p in self.inputs]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inputs": list(self.inputs),
            "seed": self.seed,
            "output_dir": self.output_dir,
            "profile": self.profile,
            "rules": self.rules,
            "label_column": self.label_column,
            "drop_columns": None if self.drop_columns is None else list(self.drop_columns),
            "scale": self.scale,
            "scale_fit_on": self.scale_fit_on,
            "ddof": self.ddof,
            "selection": self.selection.to_dict(),
            "model": {"kind": self.model.kind, "params": self.model.resolved_params},
            "test_fraction": self.test_fraction,
            "cv_folds": self.cv_folds,
            "mse_mode": self.mse_mode,
            "importance_mode": self.importance_mode,
            "top": self.top,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PipelineConfig":
        """
        Build a config from its JSON form.

        Raises:
            ConfigError: Missing seed or inputs, unknown keys or invalid values
        """
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if data.get("seed") is None:
            raise ConfigError("seed is mandatory")
        if not data.get("inputs"):
            raise ConfigError("inputs is mandatory")
        values = dict(data)
        values["inputs"] = tuple(str(p) for p in data["inputs"])
        if values.get("drop_columns") is not None:
            values["drop_columns"] = tuple(values["drop_columns"])
        if "selection" in values:
            values["selection"] = SelectionConfig.from_dict(values["selection"] or {})
        if "model" in values:
            model = values["model"] or {}
            values["model"] = ModelSpec(
                kind=model.get("kind", DEFAULT_MODEL_KIND),
                params=dict(model.get("params", {})),
                seed=int(data["seed"]),
            )
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(f"invalid configuration: {str(e)}")


@dataclass(frozen=True)
class PipelineResult:
    """
    What a pipeline run produced.

    Attributes:
        config_hash (str): Hash of the resolved configuration
        artifacts (Dict[str, Path]): Artifact name -> written file
        trace (Optional[SelectionTrace]): Selection trace
        report (Optional[EvalReport]): Evaluation report (with timing)
        importance (Optional[ImportanceReport]): Importance ranking, None for k-NN
        dry_run (bool): True when nothing was executed
    """
    config_hash: str
    artifacts: Dict[str, Path] = field(default_factory=dict)
    trace: Optional[SelectionTrace] = None
    report: Optional[EvalReport] = None
    importance: Optional[ImportanceReport] = None
    dry_run: bool = False
