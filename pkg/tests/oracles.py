"""
Slow, obviously-correct reference implementations the tests compare against.
"""
from fractions import Fraction
from math import ceil, fsum, log2, sqrt
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np


def pearson_two_pass(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    n = len(x)
    mx = fsum(x) / n
    my = fsum(y) / n
    sxy = fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = fsum((a - mx) ** 2 for a in x)
    syy = fsum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / sqrt(sxx * syy)


def average_ranks(x: Sequence[float]) -> List[float]:
    """Rank of v = (#values below v) + (#values equal to v + 1) / 2."""
    values = list(x)
    ordered = sorted(values)
    below: Dict[float, int] = {}
    equal: Dict[float, int] = {}
    for position, v in enumerate(ordered):
        below.setdefault(v, position)
        equal[v] = equal.get(v, 0) + 1
    return [below[v] + (equal[v] + 1) / 2 for v in values]


def spearman_by_ranks(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    return pearson_two_pass(average_ranks(x), average_ranks(y))


def kendall_all_pairs(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """tau-b by enumerating every pair (vectorized over the pair matrix)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    upper = np.triu_indices(n, k=1)
    dx = np.sign(x[:, None] - x[None, :])[upper]
    dy = np.sign(y[:, None] - y[None, :])[upper]
    n0 = n * (n - 1) // 2
    ties_x = int(np.sum(dx == 0))
    ties_y = int(np.sum(dy == 0))
    if ties_x == n0 or ties_y == n0:
        return None
    concordant = int(np.sum(dx * dy > 0))
    discordant = int(np.sum(dx * dy < 0))
    return (concordant - discordant) / sqrt((n0 - ties_x) * (n0 - ties_y))


def entropy_bits(labels: Sequence[int]) -> float:
    n = len(labels)
    counts: Dict[int, int] = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    return -fsum((c / n) * log2(c / n) for c in counts.values())


def info_gain_by_histogram(x: Sequence[float], y: Sequence[int], bins: int) -> float:
    """Equal-frequency bins: a value's bin is the number of cut values below it."""
    ordered = sorted(x)
    n = len(ordered)
    cuts = sorted({ordered[min(n - 1, max(0, ceil(k * n / bins) - 1))] for k in range(1, bins)})
    groups: Dict[int, List[int]] = {}
    for value, label in zip(x, y):
        groups.setdefault(sum(1 for c in cuts if c < value), []).append(label)
    conditional = fsum(len(g) / n * entropy_bits(g) for g in groups.values())
    return max(0.0, entropy_bits(list(y)) - conditional)


def _mean(values: List[float]) -> Optional[float]:
    return fsum(values) / len(values) if values else None


# Relative slack of every comparison against a mean; |v| within it counts as zero
TOLERANCE = 1e-12

Stats = Dict[str, Tuple[Optional[float], Optional[float], Optional[float], float]]


def _signed(values) -> List[float]:
    return [v for v in values if v is not None and abs(v) > TOLERANCE]


def _at_least(value: float, mu: Optional[float]) -> bool:
    return mu is not None and value >= mu - TOLERANCE * max(1.0, abs(mu))


def _at_most(value: float, mu: Optional[float]) -> bool:
    return mu is not None and value <= mu + TOLERANCE * max(1.0, abs(mu))


def reference_statistics(X: np.ndarray, y: np.ndarray, names: Sequence[str], bins: int = 10) -> Stats:
    """{feature: (pearson, spearman, kendall, info_gain)} from the slow reference formulas."""
    labels = [int(v) for v in y]
    stats = {}
    for j, name in enumerate(names):
        column = [float(v) for v in X[:, j]]
        stats[name] = (
            pearson_two_pass(column, labels),
            spearman_by_ranks(column, labels),
            kendall_all_pairs(column, labels),
            info_gain_by_histogram(column, labels, bins),
        )
    return stats


def reference_run(stats: Stats, order: Sequence[str]) -> Tuple[Dict[str, Set[str]], Dict[str, Optional[float]]]:
    """
    Straight-line hybrid selection over {feature: (pearson, spearman, kendall, info_gain)}.

    Inclusive correlation thresholds, strict information gain threshold, rank
    means over a2.

    Returns:
        (sets a1..a6, every class mean keyed like the trace's thresholds)
    """
    pearson = {f: stats[f][0] for f in order}
    signed = _signed(pearson.values())
    pos = _mean([v for v in signed if v > 0])
    neg = _mean([v for v in signed if v < 0])
    a1 = set()
    for f in order:
        p = pearson[f]
        if p is None or abs(p) <= TOLERANCE:
            continue
        if p > 0 and _at_least(p, pos):
            a1.add(f)
        if p < 0 and _at_most(p, neg):
            a1.add(f)
    a2 = [f for f in order if f not in a1]

    s_values = _signed(stats[f][1] for f in a2)
    k_values = _signed(stats[f][2] for f in a2)
    s_pos, s_neg = _mean([v for v in s_values if v > 0]), _mean([v for v in s_values if v < 0])
    k_pos, k_neg = _mean([v for v in k_values if v > 0]), _mean([v for v in k_values if v < 0])
    sk_pos = None if s_pos is None or k_pos is None else (k_pos + s_pos) / 2
    sk_neg = None if s_neg is None or k_neg is None else (k_neg + s_neg) / 2
    a3 = set()
    for f in a2:
        s, k = stats[f][1], stats[f][2]
        if s is None or k is None:
            continue
        score = (s + k) / 2
        if abs(score) <= TOLERANCE:
            continue
        if score > 0 and _at_least(score, sk_pos):
            a3.add(f)
        if score < 0 and _at_most(score, sk_neg):
            a3.add(f)

    mu_ig = _mean([stats[f][3] for f in order])
    a5 = {f for f in order if stats[f][3] > mu_ig + TOLERANCE * max(1.0, abs(mu_ig))}
    a4 = a1 | a3
    sets = {"a1": a1, "a2": set(a2), "a3": a3, "a4": a4, "a5": a5, "a6": a4 & a5}
    means = {
        "mu_pearson_pos": pos,
        "mu_pearson_neg": neg,
        "mu_spearman_pos": s_pos,
        "mu_spearman_neg": s_neg,
        "mu_kendall_pos": k_pos,
        "mu_kendall_neg": k_neg,
        "mu_sk_pos": sk_pos,
        "mu_sk_neg": sk_neg,
        "mu_ig": mu_ig,
    }
    return sets, means


def reference_select(stats: Stats, order: Sequence[str]) -> Dict[str, Set[str]]:
    return reference_run(stats, order)[0]


def exhaustive_gini_split(X: np.ndarray, y: np.ndarray) -> Optional[Tuple[int, float, Fraction]]:
    """
    Try every feature and every boundary between distinct values.

    Returns:
        (feature, lower value of the boundary, exact weighted Gini decrease), lowest
        feature then lowest boundary on ties; None when no boundary exists
    """
    n = len(y)
    ones = int(np.sum(y))
    parent_gini = Fraction(1) - Fraction(ones, n) ** 2 - Fraction(n - ones, n) ** 2
    best = None
    for feature in range(X.shape[1]):
        values = sorted(set(X[:, feature].tolist()))
        for low in values[:-1]:
            left = X[:, feature] <= low
            decrease = n * parent_gini
            for side in (left, ~left):
                m = int(side.sum())
                b = int(y[side].sum())
                gini = Fraction(1) - Fraction(b, m) ** 2 - Fraction(m - b, m) ** 2
                decrease -= m * gini
            if best is None or decrease > best[2]:
                best = (feature, low, decrease)
    return best
