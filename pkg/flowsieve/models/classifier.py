"""
Models for trained classifiers and the options they are trained with.

Trees are stored as flat node arrays so they serialize to compact JSON and
route a whole matrix one level at a time.
"""
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from flowsieve.config import (
    FOREST_DEFAULTS,
    GBDT_DEFAULTS,
    KNN_DEFAULTS,
    MODEL_KINDS,
    SCHEMA_VERSION,
    TREE_DEFAULTS,
)
from flowsieve.errors import ConfigError

LEAF = -1

PARAM_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "tree": TREE_DEFAULTS,
    "forest": FOREST_DEFAULTS,
    "gbdt": GBDT_DEFAULTS,
    "knn": KNN_DEFAULTS,
}


@dataclass(frozen=True)
class ModelSpec:
    """
    What to train: model kind, hyperparameters and seed.

    Attributes:
        kind (str): "tree", "forest", "gbdt" or "knn"
        params (Dict[str, Any]): Overrides of the kind's defaults
        seed (int): Seed for bootstrap and subsampling draws
    """
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}, expected one of {MODEL_KINDS}")
        unknown = set(self.params) - set(PARAM_DEFAULTS[self.kind])
        if unknown:
            raise ConfigError(f"unknown {self.kind} parameters: {sorted(unknown)}")

    @property
    def resolved_params(self) -> Dict[str, Any]:
        return {**PARAM_DEFAULTS[self.kind], **self.params}

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "params": self.resolved_params, "seed": self.seed}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSpec":
        return cls(kind=data["kind"], params=dict(data.get("params", {})), seed=int(data.get("seed", 0)))


@dataclass(frozen=True)
class TreeNode:
    """
    One node of a binary tree, referenced by index.

    Internal nodes route x[feature] <= threshold to ``left``, otherwise to
    ``right``. Leaves have feature == -1.

    Attributes:
        feature (int): Split feature index, or -1 for a leaf
        threshold (float): Split threshold (internal nodes)
        left (int): Index of the left child, or -1
        right (int): Index of the right child, or -1
        value (float): Class-1 fraction (classification) or leaf weight (boosting)
        gain (float): Impurity decrease or boosting gain of the split, 0 for leaves
        n_samples (int): Training rows that reached the node
    """
    feature: int
    threshold: float
    left: int
    right: int
    value: float
    gain: float
    n_samples: int

    @property
    def is_leaf(self) -> bool:
        return self.feature == LEAF


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """
    A tree as parallel node arrays; node 0 is the root.

    Attributes:
        feature (np.ndarray): Split feature per node, -1 for leaves
        threshold (np.ndarray): Split threshold per node
        left (np.ndarray): Left child per node
        right (np.ndarray): Right child per node
        value (np.ndarray): Node value
        gain (np.ndarray): Split gain per node
        n_samples (np.ndarray): Training rows per node
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    n_samples: np.ndarray

    @classmethod
    def from_nodes(cls, nodes: List[TreeNode]) -> "DecisionTree":
        return cls(
            feature=np.array([n.feature for n in nodes], dtype=np.int64),
            threshold=np.array([n.threshold for n in nodes], dtype=np.float64),
            left=np.array([n.left for n in nodes], dtype=np.int64),
            right=np.array([n.right for n in nodes], dtype=np.int64),
            value=np.array([n.value for n in nodes], dtype=np.float64),
            gain=np.array([n.gain for n in nodes], dtype=np.float64),
            n_samples=np.array([n.n_samples for n in nodes], dtype=np.int64),
        )

    @property
    def node_count(self) -> int:
        return int(self.feature.size)

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for i in range(self.node_count):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max()) if self.node_count else 0

    def node(self, i: int) -> TreeNode:
        return TreeNode(
            feature=int(self.feature[i]),
            threshold=float(self.threshold[i]),
            left=int(self.left[i]),
            right=int(self.right[i]),
            value=float(self.value[i]),
            gain=float(self.gain[i]),
            n_samples=int(self.n_samples[i]),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionTree":
        return cls(
            feature=np.array(data["feature"], dtype=np.int64),
            threshold=np.array(data["threshold"], dtype=np.float64),
            left=np.array(data["left"], dtype=np.int64),
            right=np.array(data["right"], dtype=np.int64),
            value=np.array(data["value"], dtype=np.float64),
            gain=np.array(data["gain"], dtype=np.float64),
            n_samples=np.array(data["n_samples"], dtype=np.int64),
        )


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """
    Common part of every trained model.

    Attributes:
        kind (str): Model kind
        feature_names (Tuple[str, ...]): Training features, in column order
        params (Dict[str, Any]): Resolved hyperparameters
        seed (int): Training seed
    """
    kind: str
    feature_names: Tuple[str, ...]
    params: Dict[str, Any]
    seed: int

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def _payload(self) -> Dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "feature_names": list(self.feature_names),
            "params": dict(self.params),
            "seed": self.seed,
            **self._payload(),
        }

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form; equal models have equal fingerprints."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class TreeModel(ClassifierModel):
    """A single CART classification tree."""
    tree: Optional[DecisionTree] = None

    def _payload(self) -> Dict[str, Any]:
        return {"tree": self.tree.to_dict()}


@dataclass(frozen=True, eq=False)
class ForestModel(ClassifierModel):
    """
    Bagged CART trees with per-split feature subsampling.

    Attributes:
        trees (Tuple[DecisionTree, ...]): At least one tree
        mtry (int): Features considered per split
    """
    trees: Tuple[DecisionTree, ...] = ()
    mtry: int = 1

    def _payload(self) -> Dict[str, Any]:
        return {"mtry": self.mtry, "trees": [t.to_dict() for t in self.trees]}


@dataclass(frozen=True, eq=False)
class GbdtModel(ClassifierModel):
    """
    Second-order gradient boosted regression trees under logistic loss.

    raw score = base_score + learning_rate * sum of tree outputs;
    probability = logistic(raw score).

    Attributes:
        trees (Tuple[DecisionTree, ...]): One tree per round, in round order
        base_score (float): Logit of the training class-1 prior
        learning_rate (float): Shrinkage applied to every tree
        l2_lambda (float): Leaf weight regularization
        loss_history (Tuple[float, ...]): Training log-loss before round 1 and after each round
    """
    trees: Tuple[DecisionTree, ...] = ()
    base_score: float = 0.0
    learning_rate: float = 0.3
    l2_lambda: float = 1.0
    loss_history: Tuple[float, ...] = ()

    @property
    def rounds(self) -> int:
        return len(self.trees)

    def _payload(self) -> Dict[str, Any]:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "l2_lambda": self.l2_lambda,
            "loss_history": list(self.loss_history),
            "trees": [t.to_dict() for t in self.trees],
        }


@dataclass(frozen=True, eq=False)
class KnnModel(ClassifierModel):
    """
    Stored training data for Euclidean k-nearest-neighbour voting.

    Attributes:
        X (np.ndarray): Training matrix
        y (np.ndarray): Training labels
        k (int): Neighbours per vote
    """
    X: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    k: int = 5

    def _payload(self) -> Dict[str, Any]:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.astype(int).tolist()}


def model_from_dict(data: Dict[str, Any]) -> ClassifierModel:
    """Rebuild any model kind from its ``to_dict`` form."""
    kind = data.get("kind")
    common = {
        "kind": kind,
        "feature_names": tuple(data["feature_names"]),
        "params": dict(data.get("params", {})),
        "seed": int(data.get("seed", 0)),
    }
    if kind == "tree":
        return TreeModel(**common, tree=DecisionTree.from_dict(data["tree"]))
    if kind == "forest":
        return ForestModel(
            **common,
            trees=tuple(DecisionTree.from_dict(t) for t in data["trees"]),
            mtry=int(data["mtry"]),
        )
    if kind == "gbdt":
        return GbdtModel(
            **common,
            trees=tuple(DecisionTree.from_dict(t) for t in data["trees"]),
            base_score=float(data["base_score"]),
            learning_rate=float(data["learning_rate"]),
            l2_lambda=float(data["l2_lambda"]),
            loss_history=tuple(float(v) for v in data.get("loss_history", [])),
        )
    if kind == "knn":
        n_features = len(common["feature_names"])
        X = np.array(data["X"], dtype=np.float64).reshape(-1, n_features)
        return KnnModel(**common, X=X, y=np.array(data["y"], dtype=np.int8), k=int(data["k"]))
    raise ConfigError(f"unknown model kind {kind!r}")


@dataclass(frozen=True, eq=False)
class Prediction:
    """
    Output of any model on a matrix.

    Attributes:
        labels (np.ndarray): Predicted classes, 0 or 1
        scores (np.ndarray): Class-1 scores in [0, 1]
    """
    labels: np.ndarray
    scores: np.ndarray
