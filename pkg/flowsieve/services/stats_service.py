"""
Association statistics between a feature and the binary label.

Correlations return None when either input is constant. Information gain
discretizes the feature into equal-frequency bins taken from its order
statistics, so it is unchanged by any strictly increasing transform.
"""
import logging
from math import ceil
from typing import Optional, Tuple

import numpy as np
from scipy.stats import entropy as scipy_entropy
from scipy.stats import rankdata

from flowsieve.config import DEFAULT_BINS, DEFAULT_THREADS
from flowsieve.errors import ConfigError, DataError
from flowsieve.models.correlation import CorrelationTable, FeatureStats
from flowsieve.models.dataset import Dataset
from flowsieve.services.parallel import ordered_map

logger = logging.getLogger(__name__)


def _as_pair(x, y) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise DataError(f"at least 2 observations required, got {x.size}")
    return x, y


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def _clip_unit(r: float) -> float:
    return float(min(1.0, max(-1.0, r)))


def _pearson_unchecked(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    if _is_constant(x) or _is_constant(y):
        return None
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.dot(xc, xc) * np.dot(yc, yc))
    if denom == 0.0:
        return None
    return _clip_unit(np.dot(xc, yc) / denom)


def pearson(x, y) -> Optional[float]:
    """
    Pearson correlation coefficient.

    Args:
        x: Numeric vector
        y: Numeric vector of the same length

    Returns:
        Optional[float]: r in [-1, 1], or None if either vector is constant

    Raises:
        DataError: Length mismatch or fewer than 2 observations
    """
    x, y = _as_pair(x, y)
    return _pearson_unchecked(x, y)


def rank_average(x) -> np.ndarray:
    """Fractional ranks starting at 1; tied values share the average of their ranks."""
    return rankdata(np.asarray(x, dtype=np.float64), method="average")


def spearman(x, y) -> Optional[float]:
    """Spearman rank correlation: Pearson r of the average ranks."""
    x, y = _as_pair(x, y)
    return _pearson_unchecked(rank_average(x), rank_average(y))


def _tied_pairs(sorted_values: np.ndarray) -> int:
    """Number of pairs with equal values in an already sorted vector."""
    if sorted_values.size == 0:
        return 0
    boundaries = np.flatnonzero(np.diff(sorted_values) != 0)
    counts = np.diff(np.concatenate(([0], boundaries + 1, [sorted_values.size])))
    return int((counts * (counts - 1) // 2).sum())


def _count_inversions(values: np.ndarray) -> int:
    """
    Pairs i < j with values[i] > values[j], by bottom-up merging of sorted runs.

    ``values`` must be non-negative integers. Each level merges neighbouring
    runs of width ``w``; inversions are counted for every element of a right
    run against the larger elements of its left run.
    """
    n = values.size
    if n < 2:
        return 0
    span = int(values.max()) + 1
    positions = np.arange(n, dtype=np.int64)
    current = values.astype(np.int64)
    inversions = 0
    width = 1
    while width < n:
        block = positions // (2 * width)
        keys = current + block * span
        is_left = (positions % (2 * width)) < width
        left_keys = keys[is_left]
        right_keys = keys[~is_left]
        right_block = block[~is_left]
        if right_keys.size:
            left_end = np.searchsorted(left_keys, (right_block + 1) * span, side="left")
            first_greater = np.searchsorted(left_keys, right_keys, side="right")
            inversions += int((left_end - first_greater).sum())
        merged = np.sort(keys, kind="stable")
        current = merged - block * span
        width *= 2
    return inversions


def kendall_tau_b(x, y) -> Optional[float]:
    """
    Kendall tau-b rank correlation in O(n log n).

    Sorting by (x, y) leaves every discordant pair as a strict inversion of
    the y sequence; pairs tied in x or y are handled by the tie terms.

    Returns:
        Optional[float]: tau-b in [-1, 1], or None if either vector is constant
    """
    x, y = _as_pair(x, y)
    if _is_constant(x) or _is_constant(y):
        return None
    n = x.size
    order = np.lexsort((y, x))
    xs = x[order]
    ys = y[order]

    n0 = n * (n - 1) // 2
    n1 = _tied_pairs(xs)
    n2 = _tied_pairs(np.sort(y))
    # Joint ties: consecutive equal (x, y) after the lexicographic sort
    joint_break = (np.diff(xs) != 0) | (np.diff(ys) != 0)
    boundaries = np.flatnonzero(joint_break)
    counts = np.diff(np.concatenate(([0], boundaries + 1, [n])))
    n3 = int((counts * (counts - 1) // 2).sum())

    y_codes = np.unique(ys, return_inverse=True)[1].ravel()
    discordant = _count_inversions(y_codes)

    numerator = n0 - n1 - n2 + n3 - 2 * discordant
    denominator = np.sqrt(float(n0 - n1) * float(n0 - n2))
    return _clip_unit(numerator / denominator)


def entropy(labels) -> float:
    """
    Shannon entropy of a label vector in bits.

    Raises:
        DataError: Empty vector
    """
    labels = np.asarray(labels).ravel()
    if labels.size == 0:
        raise DataError("entropy of an empty vector")
    _, counts = np.unique(labels, return_counts=True)
    return float(scipy_entropy(counts, base=2))


def equal_frequency_bins(x, bins: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Discretize ``x`` into at most ``bins`` equal-frequency bins.

    Edge k is the ceil(k * n / bins)-th smallest value; duplicate edges merge,
    so heavily tied features get fewer bins. A value falls in the bin whose
    upper edge is the first edge >= the value.

    Args:
        x: Numeric vector
        bins: Requested number of bins (>= 2)

    Returns:
        Tuple[np.ndarray, np.ndarray]: (bin code per value, unique edges)
    """
    if bins < 2:
        raise ConfigError(f"bins must be >= 2, got {bins}")
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    ordered = np.sort(x)
    indices = [ceil(k * n / bins) - 1 for k in range(1, bins)]
    edges = np.unique(ordered[np.clip(indices, 0, n - 1)])
    codes = np.searchsorted(edges, x, side="left")
    return codes.astype(np.int64), edges


def information_gain(x, y, bins: int = DEFAULT_BINS) -> float:
    """
    Information gain of the label given the binned feature, in bits.

    Returns:
        float: H(y) - sum_b (n_b / n) H(y | b), clamped to [0, H(y)]
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y).ravel()
    if x.shape != y.shape:
        raise DataError(f"length mismatch: {x.size} vs {y.size}")
    total = entropy(y)
    if total == 0.0:
        return 0.0
    codes, _ = equal_frequency_bins(x, bins)
    _, y_codes = np.unique(y, return_inverse=True)
    y_codes = y_codes.ravel()
    n_classes = int(y_codes.max()) + 1
    joint = np.bincount(codes * n_classes + y_codes, minlength=(int(codes.max()) + 1) * n_classes)
    joint = joint.reshape(-1, n_classes)
    bin_sizes = joint.sum(axis=1)
    conditional = 0.0
    for size, counts in zip(bin_sizes, joint):
        if size:
            conditional += (size / x.size) * float(scipy_entropy(counts, base=2))
    return float(min(total, max(0.0, total - conditional)))


def _feature_stats(args) -> FeatureStats:
    name, x, y, bins = args
    return FeatureStats(
        name=name,
        pearson=_pearson_unchecked(x, y),
        spearman=spearman(x, y),
        kendall=kendall_tau_b(x, y),
        info_gain=information_gain(x, y, bins),
    )


def correlation_table(d: Dataset, bins: int = DEFAULT_BINS, threads: int = DEFAULT_THREADS) -> CorrelationTable:
    """
    All four statistics of every feature against the label.

    Features are independent, so they are spread over ``threads`` workers;
    the table is identical for any thread count.

    Raises:
        DataError: Unlabeled dataset, single class or fewer than 2 rows
    """
    if bins < 2:
        raise ConfigError(f"bins must be >= 2, got {bins}")
    y = d.require_labels()
    if d.n_rows < 2:
        raise DataError(f"at least 2 rows required, got {d.n_rows}")
    d.require_both_classes()
    y_float = y.astype(np.float64)
    work = [(name, np.ascontiguousarray(d.X[:, j]), y_float, bins) for j, name in enumerate(d.feature_names)]
    rows = ordered_map(_feature_stats, work, threads=threads)
    table = CorrelationTable(rows=tuple(rows), label_entropy=entropy(y), bins=bins)
    undefined = sum(1 for r in rows if r.pearson is None)
    logger.info(f"Computed statistics for {len(rows)} features ({undefined} constant)")
    return table
