import json
import time

import numpy as np
import pytest

from flowsieve.errors import ConfigError, DataError, TrainingError
from flowsieve.models.classifier import (
    DecisionTree,
    ForestModel,
    ModelSpec,
    TreeModel,
    TreeNode,
    model_from_dict,
)
from flowsieve.services import classifier_service
from flowsieve.services.classifier_service import (
    default_mtry,
    predict,
    predict_dataset,
    train,
    train_forest,
    train_gbdt,
    train_knn,
    train_tree,
)
from flowsieve.services.evaluation_service import stratified_split
from flowsieve.services.tree_builder import apply_tree


def _leaf(value):
    return DecisionTree.from_nodes([TreeNode(feature=-1, threshold=0.0, left=-1, right=-1, value=value, gain=0.0, n_samples=1)])


def test_single_tree_forest_matches_the_tree(small_blobs):
    d = small_blobs.dataset
    tree = train_tree(d.X, d.y)
    forest = train_forest(d.X, d.y, n_trees=1, bootstrap=False, mtry=d.n_features)
    assert predict(forest, d.X).labels.tolist() == predict(tree, d.X).labels.tolist()


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["tree", "forest", "gbdt", "knn"])
def test_separated_blobs_are_learned(blobs, kind):
    train_set, test_set = stratified_split(blobs.dataset, 0.3, seed=1)
    model = train(ModelSpec(kind=kind), train_set)
    labels = predict_dataset(model, test_set).labels
    assert np.mean(labels == test_set.y) >= 0.99


@pytest.mark.slow
def test_boosting_is_fast_and_loss_never_rises(blobs):
    d = blobs.dataset
    start = time.perf_counter()
    model = train_gbdt(d.X, d.y, rounds=100, max_depth=6)
    assert time.perf_counter() - start < 10.0
    history = model.loss_history
    assert len(history) == 101
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))


def test_zero_rounds_predicts_the_prior():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    model = train_gbdt(X, [0, 1, 0, 1], rounds=0)
    prediction = predict(model, X)
    assert prediction.scores.tolist() == [0.5] * 4
    assert prediction.labels.tolist() == [1] * 4

    skewed = train_gbdt(X, [0, 0, 0, 1], rounds=0)
    assert predict(skewed, X).scores == pytest.approx([0.25] * 4)


def test_boosting_learns_a_threshold():
    X = np.arange(20.0).reshape(-1, 1)
    y = (X[:, 0] >= 10).astype(int)
    model = train_gbdt(X, y, rounds=10)
    assert predict(model, X).labels.tolist() == y.tolist()


def test_boosting_loss_history_never_rises(small_blobs):
    d = small_blobs.dataset
    history = train_gbdt(d.X, d.y, rounds=30, colsample=0.6, seed=4).loss_history
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))


def test_boosting_fails_when_the_loss_rises(monkeypatch, caplog):
    # Trees pushed against the gradient make the next round's loss larger
    monkeypatch.setattr(classifier_service, "apply_tree", lambda tree, X: -apply_tree(tree, X))
    X = np.arange(20.0).reshape(-1, 1)
    y = (X[:, 0] >= 10).astype(int)
    with pytest.raises(TrainingError, match="round 1"):
        train_gbdt(X, y, rounds=5)
    assert "Training loss increased" in caplog.text

    caplog.clear()
    model = train_gbdt(X, y, rounds=3, subsample=0.9, seed=1)
    assert len(model.loss_history) == 4
    assert "Training loss increased" in caplog.text


def test_boosting_rejects_bad_options():
    X, y = np.array([[0.0], [1.0]]), np.array([0, 1])
    with pytest.raises(ConfigError):
        train_gbdt(X, y, learning_rate=0)
    with pytest.raises(ConfigError):
        train_gbdt(X, y, subsample=1.5)
    with pytest.raises(DataError):
        train_gbdt(X, [1, 1])


def test_knn_single_neighbour_reproduces_training(small_blobs):
    d = small_blobs.dataset
    model = train_knn(d.X, d.y, k=1)
    assert predict(model, d.X).labels.tolist() == d.y.tolist()


def test_knn_even_split_goes_to_benign(caplog):
    model = train_knn([[0.0], [1.0]], [0, 1], k=2)
    prediction = predict(model, [[0.5]])
    assert prediction.labels.tolist() == [0]
    assert prediction.scores.tolist() == [0.5]
    assert "even" in caplog.text


def test_knn_distance_ties_go_to_lower_rows():
    model = train_knn([[1.0], [-1.0], [5.0]], [1, 0, 0], k=1)
    assert predict(model, [[0.0]]).labels.tolist() == [1]


def test_knn_rejects_k_above_rows():
    with pytest.raises(TrainingError):
        train_knn([[0.0], [1.0]], [0, 1], k=3)


def test_tree_score_threshold():
    model = TreeModel(kind="tree", feature_names=("a",), params={}, seed=0, tree=_leaf(0.7))
    prediction = predict(model, [[1.0], [2.0]])
    assert prediction.labels.tolist() == [1, 1]
    assert prediction.scores.tolist() == [0.7, 0.7]


def test_forest_score_is_the_vote_fraction():
    trees = (_leaf(0.9), _leaf(0.6), _leaf(0.2))
    model = ForestModel(kind="forest", feature_names=("a",), params={}, seed=0, trees=trees, mtry=1)
    prediction = predict(model, [[0.0]])
    assert prediction.scores[0] == pytest.approx(2 / 3)
    assert prediction.labels.tolist() == [1]


def test_default_mtry():
    assert [default_mtry(p) for p in (1, 3, 4, 10, 80)] == [1, 1, 2, 3, 8]


def test_forest_is_deterministic_across_threads(small_blobs):
    d = small_blobs.dataset
    one = train_forest(d.X, d.y, n_trees=8, seed=3, threads=1)
    four = train_forest(d.X, d.y, n_trees=8, seed=3, threads=4)
    assert one.fingerprint() == four.fingerprint()
    assert train_forest(d.X, d.y, n_trees=8, seed=4).fingerprint() != one.fingerprint()


@pytest.mark.parametrize("kind", ["tree", "forest", "gbdt", "knn"])
def test_models_survive_json(small_blobs, kind):
    d = small_blobs.dataset
    params = {"n_trees": 5} if kind == "forest" else {"rounds": 5} if kind == "gbdt" else {}
    model = train(ModelSpec(kind=kind, params=params, seed=2), d)
    again = model_from_dict(json.loads(json.dumps(model.to_dict())))
    assert again.fingerprint() == model.fingerprint()
    assert np.array_equal(predict(again, d.X).scores, predict(model, d.X).scores)


def test_model_spec_validation():
    with pytest.raises(ConfigError):
        ModelSpec(kind="svm")
    with pytest.raises(ConfigError):
        ModelSpec(kind="knn", params={"n_trees": 3})
    assert ModelSpec(kind="knn").resolved_params == {"k": 5}


def test_predict_checks_columns(small_blobs):
    d = small_blobs.dataset
    model = train_tree(d.X, d.y, max_depth=2, feature_names=d.feature_names)
    with pytest.raises(TrainingError):
        predict(model, d.X[:, :2])
    with pytest.raises(DataError):
        predict_dataset(model, d.subset_features(list(reversed(d.feature_names))))


def test_training_rejects_empty_and_mismatched_input():
    with pytest.raises(TrainingError):
        train_tree(np.zeros((0, 2)), [])
    with pytest.raises(TrainingError):
        train_tree([[1.0], [2.0]], [0])


@pytest.mark.parametrize("kind", ["tree", "knn"])
def test_training_row_order_does_not_change_predictions(small_blobs, rng, kind):
    d = small_blobs.dataset
    queries = rng.standard_normal((200, d.n_features)) * 3.0
    model = train(ModelSpec(kind=kind), d)
    for _ in range(3):
        order = rng.permutation(d.n_rows)
        shuffled = train(ModelSpec(kind=kind), d.subset_rows(order))
        for X in (d.X, queries):
            assert np.array_equal(predict(shuffled, X).scores, predict(model, X).scores)
