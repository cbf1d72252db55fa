"""
Greedy binary tree growth shared by the tree-based classifiers.

Split search sorts the node's rows by each candidate feature and scores every
boundary between consecutive distinct values; thresholds are the midpoints of
those values. Ties go to the lowest feature index, then the lowest threshold.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from flowsieve.models.classifier import LEAF, DecisionTree, TreeNode

logger = logging.getLogger(__name__)

# Float scores within this relative distance of the best are re-ranked exactly
NEAR_TIE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Split:
    """A chosen split: rows with x[feature] <= threshold go left."""
    feature: int
    threshold: float
    gain: float


def _midpoint(low: float, high: float) -> float:
    mid = low / 2.0 + high / 2.0
    if not (low <= mid < high):
        mid = low
    return float(mid)


def _sorted_column(X: np.ndarray, rows: np.ndarray, feature: int):
    x = X[rows, feature]
    order = np.argsort(x, kind="stable")
    return x[order], order


def _gini_candidate(x_sorted: np.ndarray, y_sorted: np.ndarray, min_samples_leaf: int):
    """
    Best boundary of one feature under the Gini criterion.

    Maximizes S = (aL² + bL²)/nL + (aR² + bR²)/nR, where a/b are class 0/1
    counts; n·gini(parent) − nL·gini(L) − nR·gini(R) = S − (a² + b²)/n.

    Returns:
        Optional[tuple]: (exact score, boundary position) or None
    """
    n = x_sorted.size
    n_left = np.arange(1, n, dtype=np.int64)
    valid = (x_sorted[1:] != x_sorted[:-1]) & (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)
    if not valid.any():
        return None
    ones_left = np.cumsum(y_sorted, dtype=np.int64)[:-1]
    ones_total = int(ones_left[-1] + y_sorted[-1])
    zeros_left = n_left - ones_left
    ones_right = ones_total - ones_left
    zeros_right = (n - n_left) - ones_right

    nl = n_left.astype(np.float64)
    nr = (n - n_left).astype(np.float64)
    score = (zeros_left * zeros_left + ones_left * ones_left).astype(np.float64) / nl
    score += (zeros_right * zeros_right + ones_right * ones_right).astype(np.float64) / nr
    score[~valid] = -np.inf
    best = score.max()
    near = np.flatnonzero(score >= best - NEAR_TIE_TOLERANCE * max(1.0, abs(best)))

    exact_best = None
    position = None
    for i in near:
        exact = Fraction(int(zeros_left[i]) ** 2 + int(ones_left[i]) ** 2, int(n_left[i])) + Fraction(
            int(zeros_right[i]) ** 2 + int(ones_right[i]) ** 2, int(n - n_left[i])
        )
        if exact_best is None or exact > exact_best:
            exact_best, position = exact, int(i)
    return exact_best, position


def best_gini_split(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    features: Iterable[int],
    min_samples_leaf: int = 1,
) -> Optional[Split]:
    """
    Best Gini split of ``rows`` over ``features``.

    Args:
        X: Full training matrix
        y: Full training labels (0/1)
        rows: Row indices of the node
        features: Candidate feature indices
        min_samples_leaf: Minimum rows on each side

    Returns:
        Optional[Split]: None when no feature has a valid boundary
    """
    best_score = None
    best: Optional[Split] = None
    y_rows = y[rows]
    n = rows.size
    ones = int(y_rows.sum())
    parent = Fraction((n - ones) ** 2 + ones ** 2, n)
    for feature in sorted(features):
        x_sorted, order = _sorted_column(X, rows, feature)
        candidate = _gini_candidate(x_sorted, y_rows[order], min_samples_leaf)
        if candidate is None:
            continue
        score, i = candidate
        if best_score is None or score > best_score:
            best_score = score
            best = Split(
                feature=int(feature),
                threshold=_midpoint(float(x_sorted[i]), float(x_sorted[i + 1])),
                gain=max(0.0, float(score - parent)),
            )
    return best


def best_boosting_split(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    rows: np.ndarray,
    features: Iterable[int],
    l2_lambda: float,
    min_child_weight: float,
) -> Optional[Split]:
    """
    Best second-order split of ``rows``; only strictly positive gains qualify.

    gain = ½ [GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)]
    """
    best: Optional[Split] = None
    g_rows = grad[rows]
    h_rows = hess[rows]
    G = float(g_rows.sum())
    H = float(h_rows.sum())
    parent = G * G / (H + l2_lambda)
    for feature in sorted(features):
        x_sorted, order = _sorted_column(X, rows, feature)
        GL = np.cumsum(g_rows[order])[:-1]
        HL = np.cumsum(h_rows[order])[:-1]
        GR = G - GL
        HR = H - HL
        valid = (x_sorted[1:] != x_sorted[:-1]) & (HL >= min_child_weight) & (HR >= min_child_weight)
        if not valid.any():
            continue
        gain = 0.5 * (GL * GL / (HL + l2_lambda) + GR * GR / (HR + l2_lambda) - parent)
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > 0 and (best is None or gain[i] > best.gain):
            best = Split(
                feature=int(feature),
                threshold=_midpoint(float(x_sorted[i]), float(x_sorted[i + 1])),
                gain=float(gain[i]),
            )
    return best


def grow_tree(
    X: np.ndarray,
    rows: np.ndarray,
    max_depth: Optional[int],
    leaf_value: Callable[[np.ndarray], float],
    can_split: Callable[[np.ndarray], bool],
    find_split: Callable[[np.ndarray], Optional[Split]],
) -> DecisionTree:
    """
    Grow a tree depth-first from ``rows``.

    Args:
        X: Training matrix
        rows: Row indices of the root (duplicates allowed, e.g. bootstrap draws)
        max_depth: Depth cap, None for unlimited
        leaf_value: Value of a node from its rows
        can_split: Whether a node may be split at all
        find_split: Best split of a node, or None

    Returns:
        DecisionTree: Node 0 is the root
    """
    nodes: List[dict] = []
    stack = []

    def new_node(node_rows: np.ndarray, depth: int) -> int:
        nodes.append(
            {
                "feature": LEAF,
                "threshold": 0.0,
                "left": LEAF,
                "right": LEAF,
                "value": float(leaf_value(node_rows)),
                "gain": 0.0,
                "n_samples": int(node_rows.size),
            }
        )
        stack.append((len(nodes) - 1, node_rows, depth))
        return len(nodes) - 1

    new_node(rows, 0)
    while stack:
        index, node_rows, depth = stack.pop()
        if max_depth is not None and depth >= max_depth:
            continue
        if not can_split(node_rows):
            continue
        split = find_split(node_rows)
        if split is None:
            continue
        go_left = X[node_rows, split.feature] <= split.threshold
        node = nodes[index]
        node["feature"] = split.feature
        node["threshold"] = split.threshold
        node["gain"] = split.gain
        node["left"] = new_node(node_rows[go_left], depth + 1)
        node["right"] = new_node(node_rows[~go_left], depth + 1)

    return DecisionTree.from_nodes([TreeNode(**n) for n in nodes])


def build_gini_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    max_depth: Optional[int] = None,
    min_samples_leaf: int = 1,
    mtry: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DecisionTree:
    """
    CART classification tree; leaf value is the class-1 fraction.

    Impure nodes are split even when the best split has zero gain. With
    ``mtry`` below the feature count, each node draws ``mtry`` features; if
    none of them separates the node, further features are tried in draw order.
    """
    n_features = X.shape[1]

    def leaf_value(node_rows: np.ndarray) -> float:
        return float(y[node_rows].sum()) / node_rows.size

    def can_split(node_rows: np.ndarray) -> bool:
        if node_rows.size < 2 * min_samples_leaf:
            return False
        ones = int(y[node_rows].sum())
        return 0 < ones < node_rows.size

    def find_split(node_rows: np.ndarray) -> Optional[Split]:
        if mtry is None or mtry >= n_features:
            return best_gini_split(X, y, node_rows, range(n_features), min_samples_leaf)
        drawn = rng.permutation(n_features)
        split = best_gini_split(X, y, node_rows, drawn[:mtry], min_samples_leaf)
        for extra in drawn[mtry:]:
            if split is not None:
                break
            split = best_gini_split(X, y, node_rows, [extra], min_samples_leaf)
        return split

    return grow_tree(X, rows, max_depth, leaf_value, can_split, find_split)


def build_boosting_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    rows: np.ndarray,
    features: Sequence[int],
    max_depth: int,
    l2_lambda: float,
    min_child_weight: float,
) -> DecisionTree:
    """Regression tree on gradients; leaf weight is −G/(H+λ)."""

    def leaf_value(node_rows: np.ndarray) -> float:
        return -float(grad[node_rows].sum()) / (float(hess[node_rows].sum()) + l2_lambda)

    def can_split(node_rows: np.ndarray) -> bool:
        return node_rows.size >= 2

    def find_split(node_rows: np.ndarray) -> Optional[Split]:
        return best_boosting_split(X, grad, hess, node_rows, features, l2_lambda, min_child_weight)

    return grow_tree(X, rows, max_depth, leaf_value, can_split, find_split)


def apply_tree(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    """Leaf value reached by every row of ``X``."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        feature = tree.feature[node]
        active = np.flatnonzero(feature != LEAF)
        if active.size == 0:
            break
        current = node[active]
        go_left = X[active, feature[active]] <= tree.threshold[current]
        node[active] = np.where(go_left, tree.left[current], tree.right[current])
    return tree.value[node]
