import json

import numpy as np
import pytest

from flowsieve.errors import ConfigError, DataError, UnsupportedModelError
from flowsieve.models.importance import ImportanceReport
from flowsieve.models.selection import SelectionTrace
from flowsieve.services.classifier_service import train_forest, train_gbdt, train_knn, train_tree
from flowsieve.services.evaluation_service import evaluate
from flowsieve.services.explain_service import (
    NO_SPLITS_NOTE,
    build_report,
    feature_importance,
    importance_frame,
    render_report,
)
from flowsieve.services.selection_service import select


def _trace_for(names):
    names = tuple(names)
    return SelectionTrace(features=names, a1=names, a2=(), a3=(), a4=names, a5=names, a6=names)


@pytest.fixture
def separable(rng, dataset_of):
    y = rng.integers(0, 2, size=200)
    y[:2] = [0, 1]
    return dataset_of([rng.standard_normal(200), rng.standard_normal(200), y * 3.0], y)


def test_stump_importance_goes_to_the_split_feature(separable):
    model = train_tree(separable.X, separable.y, max_depth=1, feature_names=separable.feature_names)
    imp = feature_importance(model)
    assert imp.entries[0].feature == "f2"
    assert imp.entries[0].normalized == 1.0
    assert [e.importance for e in imp.entries[1:]] == [0.0, 0.0]
    assert [e.feature for e in imp.entries[1:]] == ["f0", "f1"]


def test_boosted_label_copy_concentrates_on_the_copy(label_copy_dataset):
    d = label_copy_dataset
    model = train_gbdt(d.X, d.y, rounds=20, feature_names=d.feature_names)
    imp = feature_importance(model)
    assert imp.entries[0].feature == "f0"
    assert imp.entries[0].normalized > 0.95


def test_model_without_splits(label_copy_dataset, caplog):
    d = label_copy_dataset
    model = train_gbdt(d.X, d.y, rounds=0, feature_names=d.feature_names)
    imp = feature_importance(model)
    assert imp.total == 0.0 and not imp.has_splits
    assert all(e.normalized == 0.0 for e in imp.entries)
    assert imp.top(10) == []
    assert "no splits" in caplog.text

    report = build_report(_trace_for(d.feature_names), None, imp, top=5)
    assert report["notes"] == [NO_SPLITS_NOTE]
    assert NO_SPLITS_NOTE in render_report(_trace_for(d.feature_names), None, imp, top=5, fmt="md")


def test_importance_sums_the_split_gains(small_blobs):
    d = small_blobs.dataset
    model = train_forest(d.X, d.y, n_trees=5, max_depth=4, seed=1, feature_names=d.feature_names)
    imp = feature_importance(model)
    expected = sum(float(t.gain[t.feature >= 0].sum()) for t in model.trees)
    assert imp.total == pytest.approx(expected)
    assert sum(e.normalized for e in imp.entries) == pytest.approx(1.0)
    assert sorted(e.feature for e in imp.entries) == sorted(d.feature_names)

    weights = feature_importance(model, mode="weight")
    assert weights.total == sum(int((t.feature >= 0).sum()) for t in model.trees)


def test_equally_good_features_split_on_the_first():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    model = train_tree(X, [0, 1], feature_names=("b", "a"))
    imp = feature_importance(model)
    assert [e.feature for e in imp.entries] == ["b", "a"]


def test_knn_has_no_importance():
    with pytest.raises(UnsupportedModelError):
        feature_importance(train_knn([[0.0], [1.0]], [0, 1], k=1))


def test_bad_mode():
    model = train_tree([[0.0], [1.0]], [0, 1])
    with pytest.raises(ConfigError):
        feature_importance(model, mode="cover")


def test_report_rendering(small_blobs):
    d = small_blobs.dataset
    trace = select(d)
    chosen = d.subset_features(trace.a6)
    model = train_gbdt(chosen.X, chosen.y, rounds=10, feature_names=chosen.feature_names)
    evaluation = evaluate(model, chosen, train_seconds=0.5, cv=[1.0, 0.99])
    imp = feature_importance(model)

    data = json.loads(render_report(trace, evaluation, imp, top=3, fmt="json"))
    assert len(data["importance"]["top"]) <= 3
    assert [row["feature"] for row in data["selected_features"]] == list(trace.a6)
    assert data["chart"]["labels"] == [e["feature"] for e in data["importance"]["top"]]
    assert data["metrics"]["train_seconds"] == 0.5

    markdown = render_report(trace, evaluation, imp, top=3, fmt="md")
    assert markdown.startswith("# Flow classification report")
    assert "Cross-validation accuracies: 1.00000, 0.99000" in markdown
    assert "Accuracy" in markdown

    csv_lines = render_report(trace, evaluation, imp, top=3, fmt="csv").splitlines()
    assert csv_lines[0] == "rank,feature,importance,normalized"
    assert len(csv_lines) == 1 + len(imp.top(3))

    with pytest.raises(ConfigError):
        render_report(trace, evaluation, imp, fmt="html")


def test_report_rejects_mismatched_features(separable):
    model = train_tree(separable.X, separable.y, feature_names=separable.feature_names)
    with pytest.raises(DataError):
        build_report(_trace_for(["f0", "f1"]), None, feature_importance(model), top=3)


def test_importance_frame_and_json(separable):
    model = train_tree(separable.X, separable.y, max_depth=1, feature_names=separable.feature_names)
    imp = feature_importance(model)
    frame = importance_frame(imp, 5)
    assert frame["feature"].tolist() == ["f2"]
    assert frame["rank"].tolist() == [1]
    assert ImportanceReport.from_dict(imp.to_dict()) == imp


@pytest.mark.slow
def test_noise_features_get_almost_no_importance(blobs):
    d = blobs.dataset
    model = train_gbdt(d.X, d.y, feature_names=d.feature_names)
    imp = feature_importance(model)
    assert imp.total == pytest.approx(sum(float(t.gain[t.feature >= 0].sum()) for t in model.trees), abs=1e-9)
    by_name = {e.feature: e.normalized for e in imp.entries}
    for name in blobs.noise:
        assert by_name[name] < 0.02


def test_importance_refers_to_its_selection_trace(small_blobs):
    d = small_blobs.dataset
    trace = select(d)
    chosen = d.subset_features(trace.a6)
    model = train_tree(chosen.X, chosen.y, max_depth=3, feature_names=chosen.feature_names)
    imp = feature_importance(model, trace=trace)
    assert imp.trace_fingerprint == trace.fingerprint()
    assert SelectionTrace.from_dict(json.loads(json.dumps(trace.to_dict()))).fingerprint() == imp.trace_fingerprint
    assert ImportanceReport.from_dict(json.loads(json.dumps(imp.to_dict()))) == imp
    assert json.loads(render_report(trace, None, imp, fmt="json"))["importance"]["trace_fingerprint"] == imp.trace_fingerprint

    other = SelectionTrace(
        features=trace.features, a1=trace.a6, a2=(), a3=(), a4=trace.a6, a5=trace.a6, a6=trace.a6
    )
    with pytest.raises(DataError):
        build_report(other, None, imp, top=3)
    with pytest.raises(DataError):
        feature_importance(model, trace=_trace_for(["f0"]))
