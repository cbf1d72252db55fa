"""
Training and inference for the four classifiers: CART tree, random forest,
gradient boosted trees and k-nearest neighbours.

Every model scores rows with a class-1 probability in [0, 1]. Labels are
score >= 0.5, except k-NN, where an even vote split goes to class 0.
"""
import logging
from math import floor, sqrt
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from flowsieve.config import (
    DECISION_THRESHOLD,
    DEFAULT_THREADS,
    KNN_QUERY_BLOCK_CELLS,
    LOSS_INCREASE_TOLERANCE,
)
from flowsieve.errors import ConfigError, DataError, TrainingError
from flowsieve.models.classifier import (
    ClassifierModel,
    ForestModel,
    GbdtModel,
    KnnModel,
    ModelSpec,
    Prediction,
    TreeModel,
)
from flowsieve.models.dataset import Dataset
from flowsieve.services.parallel import ordered_map
from flowsieve.services.tree_builder import apply_tree, build_boosting_tree, build_gini_tree

logger = logging.getLogger(__name__)


def _training_arrays(X, y, require_both: bool) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise TrainingError(f"training matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0:
        raise TrainingError("empty training set")
    if y.shape != (X.shape[0],):
        raise TrainingError(f"{y.size} labels for {X.shape[0]} rows")
    if not np.isfinite(X).all():
        raise DataError("training matrix contains NaN or infinite values")
    if not np.isin(y, (0, 1)).all():
        raise DataError("labels must be 0 or 1")
    y = y.astype(np.int8)
    if require_both and (y.min() == y.max()):
        raise DataError("both classes must be present in the training set")
    return X, y


def _names(feature_names: Optional[Sequence[str]], n_features: int) -> Tuple[str, ...]:
    if feature_names is None:
        return tuple(f"f{j}" for j in range(n_features))
    names = tuple(feature_names)
    if len(names) != n_features:
        raise TrainingError(f"{len(names)} feature names for {n_features} columns")
    return names


def _check_depth(max_depth: Optional[int]) -> None:
    if max_depth is not None and max_depth < 0:
        raise ConfigError(f"max_depth must be >= 0 or None, got {max_depth}")


def train_tree(
    X,
    y,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    feature_names: Optional[Sequence[str]] = None,
) -> TreeModel:
    """
    Train a CART classification tree with the Gini criterion.

    Args:
        X: Training matrix
        y: Binary labels
        max_depth: Depth cap, None for unlimited
        min_samples_leaf: Minimum training rows per leaf
        feature_names: Column names, defaults to f0, f1, ...

    Returns:
        TreeModel: The fitted tree

    Raises:
        TrainingError: Empty training set
    """
    X, y = _training_arrays(X, y, require_both=False)
    _check_depth(max_depth)
    if min_samples_leaf < 1:
        raise ConfigError(f"min_samples_leaf must be >= 1, got {min_samples_leaf}")
    tree = build_gini_tree(X, y, np.arange(X.shape[0]), max_depth, min_samples_leaf)
    logger.info(f"Trained tree: {tree.node_count} nodes, depth {tree.depth}")
    return TreeModel(
        kind="tree",
        feature_names=_names(feature_names, X.shape[1]),
        params={"max_depth": max_depth, "min_samples_leaf": min_samples_leaf},
        seed=0,
        tree=tree,
    )


def default_mtry(n_features: int) -> int:
    return max(1, floor(sqrt(n_features)))


def train_forest(
    X,
    y,
    n_trees: int = 100,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    mtry: Optional[int] = None,
    bootstrap: bool = True,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
    threads: int = DEFAULT_THREADS,
) -> ForestModel:
    """
    Train a random forest of bootstrap CART trees.

    Tree t draws from its own generator spawned from ``seed``, so the forest
    is the same for any thread count.
    """
    X, y = _training_arrays(X, y, require_both=True)
    _check_depth(max_depth)
    if n_trees < 1:
        raise ConfigError(f"n_trees must be >= 1, got {n_trees}")
    n_rows, n_features = X.shape
    mtry = default_mtry(n_features) if mtry is None else int(mtry)
    if mtry < 1:
        raise ConfigError(f"mtry must be >= 1, got {mtry}")
    mtry = min(mtry, n_features)

    def grow(child: np.random.SeedSequence):
        rng = np.random.default_rng(child)
        rows = np.sort(rng.integers(0, n_rows, size=n_rows)) if bootstrap else np.arange(n_rows)
        return build_gini_tree(X, y, rows, max_depth, min_samples_leaf, mtry, rng)

    children = np.random.SeedSequence(seed).spawn(n_trees)
    trees = ordered_map(grow, children, threads=threads)
    logger.info(f"Trained forest: {n_trees} trees, mtry={mtry}, bootstrap={bootstrap}")
    return ForestModel(
        kind="forest",
        feature_names=_names(feature_names, n_features),
        params={
            "n_trees": n_trees,
            "max_depth": max_depth,
            "min_samples_leaf": min_samples_leaf,
            "mtry": mtry,
            "bootstrap": bootstrap,
        },
        seed=seed,
        trees=tuple(trees),
        mtry=mtry,
    )


def _log_loss(raw: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^raw) - y * raw, without forming probabilities
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


def _sample(rng: np.random.Generator, n: int, fraction: float) -> np.ndarray:
    if fraction >= 1.0:
        return np.arange(n)
    size = max(1, floor(fraction * n))
    return np.sort(rng.choice(n, size=size, replace=False))


def train_gbdt(
    X,
    y,
    rounds: int = 100,
    learning_rate: float = 0.3,
    max_depth: int = 6,
    l2_lambda: float = 1.0,
    min_child_weight: float = 1.0,
    subsample: float = 1.0,
    colsample: float = 1.0,
    seed: int = 0,
    feature_names: Optional[Sequence[str]] = None,
) -> GbdtModel:
    """
    Train gradient boosted trees on the logistic loss with second-order steps.

    Each round fits a regression tree to g = p − y and h = p(1 − p) of the
    current predictions. The training loss is recorded before the first round
    and after every round and may never rise by more than 1e-9. Row
    subsampling fits each tree to part of the data, so with ``subsample`` < 1
    a rise is only logged.

    Returns:
        GbdtModel: Trees in round order with the loss history

    Raises:
        TrainingError: The training loss rose in some round
    """
    X, y = _training_arrays(X, y, require_both=True)
    if rounds < 0:
        raise ConfigError(f"rounds must be >= 0, got {rounds}")
    if learning_rate <= 0:
        raise ConfigError(f"learning_rate must be > 0, got {learning_rate}")
    if max_depth is None or max_depth < 0:
        raise ConfigError(f"max_depth must be >= 0, got {max_depth}")
    if l2_lambda < 0:
        raise ConfigError(f"l2_lambda must be >= 0, got {l2_lambda}")
    for name, value in (("subsample", subsample), ("colsample", colsample)):
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"{name} must be in (0, 1], got {value}")

    n_rows, n_features = X.shape
    target = y.astype(np.float64)
    base_score = float(logit(target.mean()))
    raw = np.full(n_rows, base_score)
    history = [_log_loss(raw, target)]
    rng = np.random.default_rng(seed)
    trees = []
    for round_index in range(rounds):
        p = expit(raw)
        grad = p - target
        hess = p * (1.0 - p)
        rows = _sample(rng, n_rows, subsample)
        features = _sample(rng, n_features, colsample)
        tree = build_boosting_tree(X, grad, hess, rows, features, max_depth, l2_lambda, min_child_weight)
        trees.append(tree)
        raw = raw + learning_rate * apply_tree(tree, X)
        history.append(_log_loss(raw, target))
        logger.debug(f"Round {round_index + 1}: {tree.node_count} nodes, log-loss {history[-1]:.6f}")
        if history[-1] > history[-2] + LOSS_INCREASE_TOLERANCE:
            message = f"Training loss increased in round {round_index + 1}: {history[-2]} -> {history[-1]}"
            if subsample < 1.0:
                logger.warning(message)
                continue
            logger.error(message)
            raise TrainingError(
                f"training log-loss rose from {history[-2]:.12g} to {history[-1]:.12g} in round {round_index + 1}"
            )

    logger.info(f"Trained boosted ensemble: {rounds} rounds, final log-loss {history[-1]:.6f}")
    return GbdtModel(
        kind="gbdt",
        feature_names=_names(feature_names, n_features),
        params={
            "rounds": rounds,
            "learning_rate": learning_rate,
            "max_depth": max_depth,
            "l2_lambda": l2_lambda,
            "min_child_weight": min_child_weight,
            "subsample": subsample,
            "colsample": colsample,
        },
        seed=seed,
        trees=tuple(trees),
        base_score=base_score,
        learning_rate=learning_rate,
        l2_lambda=l2_lambda,
        loss_history=tuple(history),
    )


def train_knn(X, y, k: int = 5, feature_names: Optional[Sequence[str]] = None) -> KnnModel:
    """
    Store the training data for k-nearest-neighbour voting.

    Raises:
        TrainingError: k > number of training rows
    """
    X, y = _training_arrays(X, y, require_both=False)
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if k > X.shape[0]:
        raise TrainingError(f"k={k} exceeds the {X.shape[0]} training rows")
    if k % 2 == 0:
        logger.warning(f"k={k} is even: tied votes are labelled benign")
    return KnnModel(
        kind="knn",
        feature_names=_names(feature_names, X.shape[1]),
        params={"k": k},
        seed=0,
        X=X.copy(),
        y=y.copy(),
        k=k,
    )


def train(spec: ModelSpec, d: Dataset, threads: int = DEFAULT_THREADS) -> ClassifierModel:
    """Train the model ``spec`` describes on a labelled dataset."""
    y = d.require_labels()
    params = spec.resolved_params
    if spec.kind == "tree":
        return train_tree(d.X, y, feature_names=d.feature_names, **params)
    if spec.kind == "forest":
        return train_forest(d.X, y, seed=spec.seed, feature_names=d.feature_names, threads=threads, **params)
    if spec.kind == "gbdt":
        return train_gbdt(d.X, y, seed=spec.seed, feature_names=d.feature_names, **params)
    return train_knn(d.X, y, feature_names=d.feature_names, **params)


def _knn_votes(model: KnnModel, Q: np.ndarray) -> np.ndarray:
    """Class-1 votes among the k nearest training rows of every query row."""
    n_train = model.X.shape[0]
    k = model.k
    votes = np.zeros(Q.shape[0], dtype=np.int64)
    distances = np.zeros((Q.shape[0], n_train))
    for j in range(Q.shape[1]):
        diff = Q[:, j, None] - model.X[None, :, j]
        distances += diff * diff
    for i, row in enumerate(distances):
        if k < n_train:
            kth = row[np.argpartition(row, k - 1)[k - 1]]
            candidates = np.flatnonzero(row <= kth)
        else:
            candidates = np.arange(n_train)
        # Distance ties go to the lower training row
        nearest = candidates[np.lexsort((candidates, row[candidates]))[:k]]
        votes[i] = int(model.y[nearest].sum())
    return votes


def _knn_predict(model: KnnModel, X: np.ndarray, threads: int) -> Prediction:
    block = max(1, KNN_QUERY_BLOCK_CELLS // max(1, model.X.shape[0]))
    starts = range(0, X.shape[0], block)
    parts = ordered_map(lambda s: _knn_votes(model, X[s:s + block]), starts, threads=threads)
    votes = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return Prediction(labels=(2 * votes > model.k).astype(np.int8), scores=votes / model.k)


def _scores(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    if isinstance(model, TreeModel):
        return apply_tree(model.tree, X)
    if isinstance(model, ForestModel):
        votes = np.zeros(X.shape[0])
        for tree in model.trees:
            votes += apply_tree(tree, X) >= DECISION_THRESHOLD
        return votes / len(model.trees)
    if isinstance(model, GbdtModel):
        raw = np.full(X.shape[0], model.base_score)
        for tree in model.trees:
            raw = raw + model.learning_rate * apply_tree(tree, X)
        return expit(raw)
    raise ConfigError(f"cannot score model kind {model.kind!r}")


def predict(model: ClassifierModel, X, threads: int = DEFAULT_THREADS) -> Prediction:
    """
    Class-1 scores and labels for every row of ``X``.

    Raises:
        TrainingError: Column count differs from training
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise TrainingError(f"model expects {model.n_features} columns, got shape {X.shape}")
    if isinstance(model, KnnModel):
        return _knn_predict(model, X, threads)
    scores = np.clip(_scores(model, X), 0.0, 1.0)
    return Prediction(labels=(scores >= DECISION_THRESHOLD).astype(np.int8), scores=scores)


def predict_dataset(model: ClassifierModel, d: Dataset, threads: int = DEFAULT_THREADS) -> Prediction:
    """Predict on a dataset whose features must match the model's."""
    if tuple(d.feature_names) != tuple(model.feature_names):
        raise DataError("dataset features differ from the model's training features")
    return predict(model, d.X, threads=threads)
