import itertools

import numpy as np
import pytest

from flowsieve.errors import ConfigError, DataError
from flowsieve.models.classifier import ModelSpec
from flowsieve.models.evaluation import TABLE_ROWS, ConfusionMatrix, EvalReport
from flowsieve.services.classifier_service import train, train_tree
from flowsieve.services.evaluation_service import (
    confusion,
    evaluate,
    kfold_cv,
    largest_remainder_quotas,
    metrics,
    mse,
    report_summary,
    split_indices,
    stratified_folds,
    stratified_split,
    timed_train,
)


def _labels(benign, attack, rng=None):
    y = np.array([0] * benign + [1] * attack)
    return y if rng is None else rng.permutation(y)


def test_largest_remainder_quotas():
    assert largest_remainder_quotas([70, 30], 0.3) == [21, 9]
    assert largest_remainder_quotas([7, 3], 0.3) == [2, 1]
    assert largest_remainder_quotas([5, 5], 0.5) == [3, 2]
    assert sum(largest_remainder_quotas([333, 667], 0.25)) == 250


def test_stratified_split_keeps_proportions(dataset_of, rng):
    y = _labels(70, 30, rng)
    d = dataset_of([np.arange(100.0)], y)
    train_set, test_set = stratified_split(d, 0.3, seed=5)
    assert test_set.class_counts() == {"benign": 21, "attack": 9}
    assert train_set.class_counts() == {"benign": 49, "attack": 21}
    assert sorted(train_set.X[:, 0].tolist() + test_set.X[:, 0].tolist()) == list(range(100))
    assert test_set.X[:, 0].tolist() == sorted(test_set.X[:, 0].tolist())


def test_split_is_seeded():
    y = _labels(50, 50)
    assert np.array_equal(split_indices(y, 0.3, 1)[1], split_indices(y, 0.3, 1)[1])
    assert not np.array_equal(split_indices(y, 0.3, 1)[1], split_indices(y, 0.3, 2)[1])


def test_split_rejects_bad_input(dataset_of):
    d = dataset_of([np.arange(10.0)], _labels(9, 1))
    with pytest.raises(DataError):
        stratified_split(d, 0.3)
    with pytest.raises(ConfigError):
        stratified_split(d, 1.0)


def test_folds_partition_rows(rng):
    y = _labels(60, 43, rng)
    folds = stratified_folds(y, 5, seed=0)
    assert [f.size for f in folds] == [21, 21, 21, 20, 20]
    assert sorted(np.concatenate(folds).tolist()) == list(range(103))
    for fold in folds:
        attack = int(y[fold].sum())
        assert 8 <= attack <= 9


def test_folds_reject_bad_k():
    with pytest.raises(ConfigError):
        stratified_folds(_labels(5, 5), 1)
    with pytest.raises(DataError):
        stratified_folds(_labels(10, 3), 5)


def test_confusion_counts():
    cm = confusion([1, 0, 1, 0, 1], [1, 1, 0, 0, 1])
    assert cm == ConfusionMatrix(tp=2, tn=1, fp=1, fn=1)
    with pytest.raises(DataError):
        confusion([1, 0], [1])


def test_metrics_example():
    m = metrics(ConfusionMatrix(tp=50, tn=40, fp=5, fn=5))
    assert m.accuracy == pytest.approx(0.9)
    assert m.precision_pos == pytest.approx(0.9091, abs=1e-4)
    assert m.recall_pos == pytest.approx(0.9091, abs=1e-4)
    assert m.f1_pos == pytest.approx(0.9091, abs=1e-4)
    assert m.precision_weighted == pytest.approx((45 * 40 / 45 + 55 * 50 / 55) / 100)
    assert m.degenerate == ()


def test_metrics_zero_denominators():
    m = metrics(ConfusionMatrix(tp=0, tn=5, fp=0, fn=5))
    assert m.precision_pos == 0.0
    assert m.recall_pos == 0.0
    assert m.f1_pos == 0.0
    assert set(m.degenerate) == {"precision_pos", "f1_pos"}
    assert m.accuracy == 0.5


def test_metrics_reject_empty_and_mismatched_supports():
    with pytest.raises(DataError):
        metrics(ConfusionMatrix(tp=0, tn=0, fp=0, fn=0))
    with pytest.raises(DataError):
        metrics(ConfusionMatrix(tp=1, tn=1, fp=0, fn=0), {"benign": 2, "attack": 0})


@pytest.mark.slow
def test_metric_identities_on_small_matrices():
    for tp, tn, fp, fn in itertools.product(range(21), repeat=4):
        if tp + tn + fp + fn == 0:
            continue
        m = metrics(ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn))
        assert m.accuracy == (tp + tn) / (tp + tn + fp + fn)
        assert m.precision_pos == (tp / (tp + fp) if tp + fp else 0.0)
        assert m.recall_pos == (tp / (tp + fn) if tp + fn else 0.0)
        if m.precision_pos + m.recall_pos:
            expected_f1 = 2 * m.precision_pos * m.recall_pos / (m.precision_pos + m.recall_pos)
            assert m.f1_pos == pytest.approx(expected_f1, abs=1e-12)
        else:
            assert m.f1_pos == 0.0
        assert m.recall_weighted == pytest.approx(m.accuracy, abs=1e-12)
        assert 0.0 <= m.f1_weighted <= 1.0


def test_mse_modes():
    assert mse([1, 0, 1], [1, 0, 1]) == 0.0
    assert mse([1, 1], [0, 0]) == 1.0
    assert mse([1] + [0] * 9, [0] * 10) == pytest.approx(0.1)
    assert mse([0.9, 0.2], [1, 0], mode="brier") == pytest.approx(0.025)
    assert mse([0.9, 0.2], [1, 0], mode="hard") == 0.0
    with pytest.raises(ConfigError):
        mse([1], [1], mode="log")


def test_hard_mse_is_the_error_rate(rng):
    predicted = rng.integers(0, 2, size=200)
    actual = rng.integers(0, 2, size=200)
    cm = confusion(predicted, actual)
    assert mse(predicted, actual) == pytest.approx((cm.fp + cm.fn) / cm.total)


def test_timed_train_measures_the_call(label_copy_dataset):
    model, seconds = timed_train(lambda d: train(ModelSpec(kind="tree"), d), label_copy_dataset)
    assert seconds > 0
    assert model.kind == "tree"


def test_evaluate_label_copy(label_copy_dataset):
    model = train_tree(label_copy_dataset.X, label_copy_dataset.y, feature_names=label_copy_dataset.feature_names)
    report = evaluate(model, label_copy_dataset, train_seconds=0.25, cv=[1.0, 1.0])
    assert report.accuracy == 1.0
    assert report.mse == 0.0
    assert report_summary(report)["cv_mean"] == 1.0
    assert "train_seconds" not in report.to_dict(include_timing=False)
    assert EvalReport.from_dict(report.to_dict()) == report


def test_cross_validation_on_a_label_copy(label_copy_dataset):
    accuracies = kfold_cv(label_copy_dataset, k=5, spec=ModelSpec(kind="tree"), threads=2)
    assert accuracies == [1.0] * 5
    with pytest.raises(ConfigError):
        kfold_cv(label_copy_dataset, k=5)


def test_report_table_rows():
    m = metrics(ConfusionMatrix(tp=50, tn=40, fp=5, fn=5))
    report = EvalReport(model_kind="gbdt", confusion=ConfusionMatrix(tp=50, tn=40, fp=5, fn=5), metrics=m, mse=0.1)
    frame = report.to_frame()
    assert frame["Metric"].tolist() == TABLE_ROWS
    assert frame["gbdt"].tolist()[0] == "0.90000"
    assert frame["gbdt"].tolist()[4] == "n/a"
    assert "Mean Squared Error" in report.to_table()
