"""
Stratified splitting, cross-validation and classification metrics.
"""
import logging
import time
from math import floor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from flowsieve.config import DEFAULT_CV_FOLDS, DEFAULT_TEST_FRACTION, DEFAULT_THREADS, MSE_MODES
from flowsieve.errors import ConfigError, DataError
from flowsieve.models.classifier import ClassifierModel, ModelSpec
from flowsieve.models.dataset import Dataset
from flowsieve.models.evaluation import ConfusionMatrix, EvalReport, Metrics
from flowsieve.services.classifier_service import predict_dataset, train
from flowsieve.services.parallel import ordered_map

logger = logging.getLogger(__name__)


def _class_rows(y: np.ndarray) -> List[np.ndarray]:
    return [np.flatnonzero(y == c) for c in (0, 1)]


def largest_remainder_quotas(class_counts: Sequence[int], test_fraction: float) -> List[int]:
    """
    Test rows per class by largest-remainder rounding.

    The total is round-half-up of n * fraction; leftover rows go to the
    classes with the largest fractional quotas, lower class first on ties.
    """
    n = sum(class_counts)
    total = floor(n * test_fraction + 0.5)
    quotas = [count * test_fraction for count in class_counts]
    allotted = [min(count, floor(q)) for count, q in zip(class_counts, quotas)]
    remainders = sorted(range(len(quotas)), key=lambda c: (-(quotas[c] - floor(quotas[c])), c))
    shortfall = total - sum(allotted)
    for c in remainders:
        if shortfall <= 0:
            break
        if allotted[c] < class_counts[c]:
            allotted[c] += 1
            shortfall -= 1
    return allotted


def stratified_split(
    d: Dataset,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: int = 0,
) -> Tuple[Dataset, Dataset]:
    """
    Split ``d`` into train and test sets with per-class proportions preserved.

    Rows are drawn per class from a generator seeded with ``seed``; both
    parts keep the original row order.

    Returns:
        Tuple[Dataset, Dataset]: (train, test)

    Raises:
        ConfigError: test_fraction outside (0, 1)
        DataError: Unlabeled data or a class with fewer than 2 rows
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    train_rows, test_rows = split_indices(d.require_labels(), test_fraction, seed)
    logger.info(f"Split {d.n_rows} rows into {train_rows.size} train / {test_rows.size} test")
    return d.subset_rows(train_rows), d.subset_rows(test_rows)


def split_indices(y: np.ndarray, test_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) row indices of a stratified split."""
    per_class = _class_rows(np.asarray(y))
    counts = [rows.size for rows in per_class]
    if min(counts) < 2:
        raise DataError(f"each class needs at least 2 rows to split, got benign={counts[0]}, attack={counts[1]}")
    quotas = largest_remainder_quotas(counts, test_fraction)
    rng = np.random.default_rng(seed)
    test_parts = []
    for rows, quota in zip(per_class, quotas):
        test_parts.append(rng.permutation(rows)[:quota])
    test = np.sort(np.concatenate(test_parts))
    train_mask = np.ones(len(y), dtype=bool)
    train_mask[test] = False
    return np.flatnonzero(train_mask), test


def stratified_folds(y, k: int = DEFAULT_CV_FOLDS, seed: int = 0) -> List[np.ndarray]:
    """
    Assign rows to ``k`` stratified folds.

    Each class is shuffled with the seeded generator and dealt round-robin;
    the dealing position carries over from class 0 to class 1, so overall
    fold sizes differ by at most one.

    Returns:
        List[np.ndarray]: Sorted test row indices of every fold

    Raises:
        ConfigError: k < 2
        DataError: A class smaller than k
    """
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    per_class = _class_rows(np.asarray(y))
    for c, rows in enumerate(per_class):
        if rows.size < k:
            raise DataError(f"class {c} has {rows.size} rows, fewer than {k} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    dealt = 0
    for rows in per_class:
        shuffled = rng.permutation(rows)
        assignment[shuffled] = (dealt + np.arange(shuffled.size)) % k
        dealt += shuffled.size
    return [np.flatnonzero(assignment == fold) for fold in range(k)]


def confusion(predicted, actual) -> ConfusionMatrix:
    """
    Count tp/tn/fp/fn with class 1 as positive.

    Raises:
        DataError: Length mismatch
    """
    predicted = np.asarray(predicted).ravel()
    actual = np.asarray(actual).ravel()
    if predicted.shape != actual.shape:
        raise DataError(f"length mismatch: {predicted.size} predictions for {actual.size} labels")
    p = predicted == 1
    a = actual == 1
    return ConfusionMatrix(
        tp=int(np.sum(p & a)),
        tn=int(np.sum(~p & ~a)),
        fp=int(np.sum(p & ~a)),
        fn=int(np.sum(~p & a)),
    )


def _ratio(numerator: float, denominator: float, name: str, degenerate: List[str]) -> float:
    if denominator == 0:
        degenerate.append(name)
        return 0.0
    return numerator / denominator


def _f1(precision: float, recall: float, name: str, degenerate: List[str]) -> float:
    return _ratio(2 * precision * recall, precision + recall, name, degenerate)


def metrics(cm: ConfusionMatrix, class_counts: Optional[Dict[str, int]] = None) -> Metrics:
    """
    Accuracy, positive-class precision/recall/F1 and their support-weighted averages.

    Recall is TP / (TP + FN). Weighted metrics average the one-vs-rest
    metrics of both classes by their support, so weighted recall equals accuracy.

    Args:
        cm: Confusion counts, total > 0
        class_counts: Optional {"benign", "attack"} supports to check against ``cm``
    """
    total = cm.total
    if total == 0:
        raise DataError("no rows were evaluated")
    if class_counts is not None:
        expected = {"benign": cm.tn + cm.fp, "attack": cm.tp + cm.fn}
        if dict(class_counts) != expected:
            raise DataError(f"class counts {dict(class_counts)} do not match confusion supports {expected}")

    degenerate: List[str] = []
    accuracy = (cm.tp + cm.tn) / total
    precision_pos = _ratio(cm.tp, cm.tp + cm.fp, "precision_pos", degenerate)
    recall_pos = _ratio(cm.tp, cm.tp + cm.fn, "recall_pos", degenerate)
    f1_pos = _f1(precision_pos, recall_pos, "f1_pos", degenerate)

    precision_neg = _ratio(cm.tn, cm.tn + cm.fn, "precision_neg", degenerate)
    recall_neg = _ratio(cm.tn, cm.tn + cm.fp, "recall_neg", degenerate)
    f1_neg = _f1(precision_neg, recall_neg, "f1_neg", degenerate)

    support_pos = cm.tp + cm.fn
    support_neg = cm.tn + cm.fp
    return Metrics(
        accuracy=accuracy,
        precision_pos=precision_pos,
        recall_pos=recall_pos,
        f1_pos=f1_pos,
        precision_weighted=(support_neg * precision_neg + support_pos * precision_pos) / total,
        recall_weighted=(support_neg * recall_neg + support_pos * recall_pos) / total,
        f1_weighted=(support_neg * f1_neg + support_pos * f1_pos) / total,
        degenerate=tuple(degenerate),
    )


def mse(predictions, actual, mode: str = "hard") -> float:
    """
    Mean squared error against binary labels.

    "hard" squares the error of the predicted labels (scores are thresholded
    at 0.5); "brier" squares the error of the scores themselves.
    """
    if mode not in MSE_MODES:
        raise ConfigError(f"mse mode must be one of {MSE_MODES}, got {mode!r}")
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if predictions.shape != actual.shape:
        raise DataError(f"length mismatch: {predictions.size} predictions for {actual.size} labels")
    if predictions.size == 0:
        raise DataError("no rows were evaluated")
    if mode == "hard":
        predictions = (predictions >= 0.5).astype(np.float64)
    return float(np.mean((predictions - actual) ** 2))


def timed_train(trainer: Callable[[Dataset], ClassifierModel], train_set: Dataset) -> Tuple[ClassifierModel, float]:
    """
    Run ``trainer`` on ``train_set`` and measure only that call.

    Returns:
        Tuple[ClassifierModel, float]: The model and its wall-clock seconds (monotonic clock)
    """
    start = time.perf_counter()
    model = trainer(train_set)
    seconds = time.perf_counter() - start
    logger.info(f"Training took {seconds:.2f} s")
    return model, seconds


def evaluate(
    model: ClassifierModel,
    test: Dataset,
    train_seconds: Optional[float] = None,
    cv: Optional[Sequence[float]] = None,
    mse_mode: str = "hard",
    threads: int = DEFAULT_THREADS,
) -> EvalReport:
    """Predict ``test`` and assemble the evaluation report."""
    actual = test.require_labels()
    prediction = predict_dataset(model, test, threads=threads)
    cm = confusion(prediction.labels, actual)
    values = prediction.labels if mse_mode == "hard" else prediction.scores
    report = EvalReport(
        model_kind=model.kind,
        confusion=cm,
        metrics=metrics(cm, test.class_counts()),
        mse=mse(values, actual, mse_mode),
        mse_mode=mse_mode,
        train_seconds=train_seconds,
        cv_fold_accuracies=None if cv is None else tuple(cv),
    )
    logger.info(f"Evaluated {model.kind} on {cm.total} rows: accuracy {report.accuracy:.5f}, mse {report.mse:.5f}")
    return report


def kfold_cv(
    d: Dataset,
    k: int = DEFAULT_CV_FOLDS,
    spec: Optional[ModelSpec] = None,
    seed: int = 0,
    threads: int = DEFAULT_THREADS,
) -> List[float]:
    """
    Stratified k-fold cross-validation accuracies, in fold order.

    Folds train independently and may run on ``threads`` workers; the model
    seed is ``spec.seed`` for every fold.
    """
    if spec is None:
        raise ConfigError("a model spec is required for cross-validation")
    y = d.require_labels()
    folds = stratified_folds(y, k, seed)

    def run_fold(test_rows: np.ndarray) -> float:
        mask = np.ones(d.n_rows, dtype=bool)
        mask[test_rows] = False
        model = train(spec, d.subset_rows(np.flatnonzero(mask)))
        test = d.subset_rows(test_rows)
        cm = confusion(predict_dataset(model, test).labels, test.require_labels())
        return (cm.tp + cm.tn) / cm.total

    accuracies = ordered_map(run_fold, folds, threads=threads)
    logger.info(f"{k}-fold CV accuracies: {', '.join(f'{a:.5f}' for a in accuracies)}")
    return accuracies


def report_summary(report: EvalReport) -> Dict[str, Any]:
    """Headline numbers for logs and dashboards."""
    summary = {"accuracy": report.accuracy, "f1_weighted": report.metrics.f1_weighted, "mse": report.mse}
    if report.cv_fold_accuracies:
        summary["cv_mean"] = float(np.mean(report.cv_fold_accuracies))
    return summary
