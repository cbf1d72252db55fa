"""
Models for confusion counts, classification metrics and evaluation reports.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from flowsieve.config import SCHEMA_VERSION


@dataclass(frozen=True)
class ConfusionMatrix:
    """
    Binary confusion counts with class 1 (attack) as the positive class.

    Attributes:
        tp (int): Attacks predicted as attacks
        tn (int): Benign rows predicted benign
        fp (int): Benign rows predicted as attacks
        fn (int): Attacks predicted benign
    """
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def to_dict(self) -> Dict[str, int]:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConfusionMatrix":
        return cls(tp=int(data["tp"]), tn=int(data["tn"]), fp=int(data["fp"]), fn=int(data["fn"]))


@dataclass(frozen=True)
class Metrics:
    """
    Positive-class and support-weighted metrics of one confusion matrix.

    Zero denominators give 0; the affected metric names are listed in ``degenerate``.
    """
    accuracy: float
    precision_pos: float
    recall_pos: float
    f1_pos: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    degenerate: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "precision_pos": self.precision_pos,
            "recall_pos": self.recall_pos,
            "f1_pos": self.f1_pos,
            "precision_weighted": self.precision_weighted,
            "recall_weighted": self.recall_weighted,
            "f1_weighted": self.f1_weighted,
            "degenerate": list(self.degenerate),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Metrics":
        return cls(
            accuracy=float(data["accuracy"]),
            precision_pos=float(data["precision_pos"]),
            recall_pos=float(data["recall_pos"]),
            f1_pos=float(data["f1_pos"]),
            precision_weighted=float(data["precision_weighted"]),
            recall_weighted=float(data["recall_weighted"]),
            f1_weighted=float(data["f1_weighted"]),
            degenerate=tuple(data.get("degenerate", [])),
        )


TABLE_ROWS = ["Accuracy", "Precision", "Recall", "F1-Score", "Training Time", "Mean Squared Error"]


@dataclass(frozen=True)
class EvalReport:
    """
    Everything measured about one trained model.

    Attributes:
        model_kind (str): Kind of the evaluated model
        confusion (ConfusionMatrix): Test-set confusion counts
        metrics (Metrics): Metrics derived from ``confusion``
        mse (float): Mean squared error of the predictions
        mse_mode (str): "hard" (labels) or "brier" (scores)
        train_seconds (Optional[float]): Wall-clock training time
        cv_fold_accuracies (Optional[Tuple[float, ...]]): Per-fold accuracies, in fold order
    """
    model_kind: str
    confusion: ConfusionMatrix
    metrics: Metrics
    mse: float
    mse_mode: str = "hard"
    train_seconds: Optional[float] = None
    cv_fold_accuracies: Optional[Tuple[float, ...]] = field(default=None)

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "model_kind": self.model_kind,
            "confusion": self.confusion.to_dict(),
            **self.metrics.to_dict(),
            "mse": self.mse,
            "mse_mode": self.mse_mode,
            "cv_fold_accuracies": None if self.cv_fold_accuracies is None else list(self.cv_fold_accuracies),
        }
        if include_timing:
            data["train_seconds"] = self.train_seconds
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalReport":
        folds = data.get("cv_fold_accuracies")
        return cls(
            model_kind=data.get("model_kind", ""),
            confusion=ConfusionMatrix.from_dict(data["confusion"]),
            metrics=Metrics.from_dict(data),
            mse=float(data["mse"]),
            mse_mode=data.get("mse_mode", "hard"),
            train_seconds=data.get("train_seconds"),
            cv_fold_accuracies=None if folds is None else tuple(folds),
        )

    def to_frame(self) -> pd.DataFrame:
        """Weighted metrics with the usual report row labels; times to 2 decimals."""
        m = self.metrics
        values: List[str] = [
            f"{m.accuracy:.5f}",
            f"{m.precision_weighted:.5f}",
            f"{m.recall_weighted:.5f}",
            f"{m.f1_weighted:.5f}",
            "n/a" if self.train_seconds is None else f"{self.train_seconds:.2f} s",
            f"{self.mse:.5f}",
        ]
        return pd.DataFrame({"Metric": TABLE_ROWS, self.model_kind or "model": values})

    def to_table(self) -> str:
        return self.to_frame().to_string(index=False)
