"""
Hybrid correlation and information gain feature selection.

Step 1 keeps features whose Pearson correlation with the label reaches the
mean of its sign group (a1); the rest (a2) get a second chance in Step 2 on
the average of Spearman and Kendall (a3). Step 3 keeps features with above
average information gain (a5). The result is (a1 ∪ a3) ∩ a5.

Zero and undefined statistics belong to neither sign group: they never move
a threshold and are never admitted by Steps 1 and 2. Every comparison against
a mean allows a relative slack of ``SELECTION_TOLERANCE``, so features whose
statistics differ only by rounding (duplicated or rescaled columns, permuted
rows) always get the same verdict.
"""
import logging
from math import fsum
from typing import Dict, Iterable, Optional, Sequence, Tuple

from flowsieve.config import DEFAULT_THREADS, SELECTION_TOLERANCE
from flowsieve.errors import DataError
from flowsieve.models.correlation import CorrelationTable
from flowsieve.models.dataset import Dataset
from flowsieve.models.selection import (
    PEARSON_BELOW,
    PEARSON_NEGATIVE,
    PEARSON_NEUTRAL,
    PEARSON_POSITIVE,
    RANK_BELOW,
    RANK_NEGATIVE,
    RANK_NEUTRAL,
    RANK_POSITIVE,
    REJECTED_CORRELATION,
    REJECTED_INFO_GAIN,
    SELECTED,
    FeatureDecision,
    InfoGainStep,
    PearsonStep,
    RankStep,
    SelectionConfig,
    SelectionTrace,
)
from flowsieve.services.stats_service import correlation_table

logger = logging.getLogger(__name__)


def _mean(values: Iterable[float]) -> Optional[float]:
    values = list(values)
    if not values:
        return None
    return fsum(values) / len(values)


def _is_zero(value: Optional[float]) -> bool:
    return value is None or abs(value) <= SELECTION_TOLERANCE


def _sign_means(values: Iterable[Optional[float]]) -> Tuple[Optional[float], Optional[float]]:
    """Means of the positive and negative defined values, near-zero ones excluded."""
    signed = [v for v in values if not _is_zero(v)]
    return _mean(v for v in signed if v > 0), _mean(v for v in signed if v < 0)


def reaches(value: float, mu: float, inclusive: bool = True) -> bool:
    """
    ``value >= mu`` (``value > mu`` when not inclusive), up to a relative slack.

    Values within ``SELECTION_TOLERANCE * max(1, |mu|)`` of the mean count as
    equal to it: they pass the inclusive test and fail the strict one.
    """
    slack = SELECTION_TOLERANCE * max(1.0, abs(mu))
    if inclusive:
        return value >= mu - slack
    return value > mu + slack


def _sign_verdict(
    value: Optional[float],
    mu_pos: Optional[float],
    mu_neg: Optional[float],
    cfg: SelectionConfig,
    labels: Tuple[str, str, str, str],
) -> str:
    positive, negative, below, neutral = labels
    if _is_zero(value):
        return neutral
    if value > 0:
        if mu_pos is not None and reaches(value, mu_pos, cfg.inclusive_positive):
            return positive
        return below
    # Mirror of the positive test: value <= mu_neg
    if mu_neg is not None and reaches(-value, -mu_neg, cfg.inclusive_negative):
        return negative
    return below


def _pair_mean(a: Optional[float], b: Optional[float]) -> Optional[float]:
    if a is None or b is None:
        return None
    return (a + b) / 2


def _ordered(features: Sequence[str], members: Iterable[str]) -> Tuple[str, ...]:
    keep = set(members)
    return tuple(f for f in features if f in keep)


def step1_pearson(table: CorrelationTable, cfg: SelectionConfig = SelectionConfig()) -> PearsonStep:
    """
    Split features by their Pearson correlation against the sign-group means.

    Returns:
        PearsonStep: a1, a2 (a partition of the table's features), both means and verdicts

    Raises:
        DataError: Empty table
    """
    if len(table) == 0:
        raise DataError("correlation table has no features")
    mu_pos, mu_neg = _sign_means(r.pearson for r in table.rows)
    labels = (PEARSON_POSITIVE, PEARSON_NEGATIVE, PEARSON_BELOW, PEARSON_NEUTRAL)
    verdicts = {r.name: _sign_verdict(r.pearson, mu_pos, mu_neg, cfg, labels) for r in table.rows}
    a1 = tuple(r.name for r in table.rows if verdicts[r.name] in (PEARSON_POSITIVE, PEARSON_NEGATIVE))
    a2 = tuple(r.name for r in table.rows if r.name not in set(a1))
    logger.info(f"Pearson step: mu+={mu_pos}, mu-={mu_neg}, |a1|={len(a1)}, |a2|={len(a2)}")
    return PearsonStep(a1=a1, a2=a2, mu_pos=mu_pos, mu_neg=mu_neg, verdicts=verdicts)


def step2_rank_rescue(
    table: CorrelationTable,
    a2: Sequence[str],
    cfg: SelectionConfig = SelectionConfig(),
) -> RankStep:
    """
    Re-admit a2 features whose averaged Spearman/Kendall statistic reaches its sign-group mean.

    The four component means come from a2's features (or every feature when
    ``cfg.rank_means_scope`` is "all"); each combined mean is undefined when
    either of its components is.

    Args:
        table: Statistics of every feature
        a2: Features the Pearson step did not admit
        cfg: Threshold options

    Returns:
        RankStep: a3 (subset of a2, in table order), the six means, per-feature scores and verdicts
    """
    unknown = [f for f in a2 if f not in set(table.feature_names)]
    if unknown:
        raise DataError(f"features not in the correlation table: {unknown}")
    if not a2:
        return RankStep(
            a3=(), mu_spearman_pos=None, mu_spearman_neg=None, mu_kendall_pos=None,
            mu_kendall_neg=None, mu_sk_pos=None, mu_sk_neg=None, scores={}, verdicts={},
        )

    candidates = [table.get(f) for f in _ordered(table.feature_names, a2)]
    scope = candidates if cfg.rank_means_scope == "a2" else list(table.rows)
    mu_s_pos, mu_s_neg = _sign_means(r.spearman for r in scope)
    mu_k_pos, mu_k_neg = _sign_means(r.kendall for r in scope)
    mu_sk_pos = _pair_mean(mu_k_pos, mu_s_pos)
    mu_sk_neg = _pair_mean(mu_k_neg, mu_s_neg)

    labels = (RANK_POSITIVE, RANK_NEGATIVE, RANK_BELOW, RANK_NEUTRAL)
    scores: Dict[str, Optional[float]] = {}
    verdicts: Dict[str, str] = {}
    for row in candidates:
        score = _pair_mean(row.spearman, row.kendall)
        scores[row.name] = score
        verdicts[row.name] = _sign_verdict(score, mu_sk_pos, mu_sk_neg, cfg, labels)
    a3 = tuple(r.name for r in candidates if verdicts[r.name] in (RANK_POSITIVE, RANK_NEGATIVE))
    logger.info(f"Rank step: mu_sk+={mu_sk_pos}, mu_sk-={mu_sk_neg}, |a3|={len(a3)}")
    return RankStep(
        a3=a3,
        mu_spearman_pos=mu_s_pos,
        mu_spearman_neg=mu_s_neg,
        mu_kendall_pos=mu_k_pos,
        mu_kendall_neg=mu_k_neg,
        mu_sk_pos=mu_sk_pos,
        mu_sk_neg=mu_sk_neg,
        scores=scores,
        verdicts=verdicts,
    )


def step3_infogain(table: CorrelationTable, cfg: SelectionConfig = SelectionConfig()) -> InfoGainStep:
    """Keep features whose information gain is above the mean over all features."""
    if len(table) == 0:
        raise DataError("correlation table has no features")
    mu = _mean(r.info_gain for r in table.rows)
    a5 = tuple(r.name for r in table.rows if reaches(r.info_gain, mu, inclusive=not cfg.ig_strict))
    logger.info(f"Information gain step: mu_ig={mu}, |a5|={len(a5)}")
    return InfoGainStep(a5=a5, mu_ig=mu)


def select_from_table(table: CorrelationTable, cfg: SelectionConfig = SelectionConfig()) -> SelectionTrace:
    """
    Run the three steps on precomputed statistics.

    Returns:
        SelectionTrace: All sets, thresholds and decisions; ``a6`` is the selection
    """
    features = tuple(table.feature_names)
    first = step1_pearson(table, cfg)
    second = step2_rank_rescue(table, first.a2, cfg)
    a4 = _ordered(features, set(first.a1) | set(second.a3))
    third = step3_infogain(table, cfg)
    a6 = _ordered(a4, third.a5)

    in_a4, in_a5 = set(a4), set(third.a5)
    decisions = []
    for name in features:
        if name not in in_a4:
            outcome = REJECTED_CORRELATION
        elif name not in in_a5:
            outcome = REJECTED_INFO_GAIN
        else:
            outcome = SELECTED
        decisions.append(
            FeatureDecision(
                feature=name,
                pearson_verdict=first.verdicts[name],
                rank_verdict=second.verdicts.get(name),
                rank_score=second.scores.get(name),
                info_gain_pass=name in in_a5,
                outcome=outcome,
            )
        )

    trace = SelectionTrace(
        features=features,
        a1=first.a1,
        a2=first.a2,
        a3=second.a3,
        a4=a4,
        a5=third.a5,
        a6=a6,
        mu_pearson_pos=first.mu_pos,
        mu_pearson_neg=first.mu_neg,
        mu_spearman_pos=second.mu_spearman_pos,
        mu_spearman_neg=second.mu_spearman_neg,
        mu_kendall_pos=second.mu_kendall_pos,
        mu_kendall_neg=second.mu_kendall_neg,
        mu_sk_pos=second.mu_sk_pos,
        mu_sk_neg=second.mu_sk_neg,
        mu_ig=third.mu_ig,
        decisions=tuple(decisions),
        config=cfg,
        table=table,
    )
    logger.info(f"Selected {len(a6)} of {len(features)} features")
    return trace


def select(d: Dataset, cfg: SelectionConfig = SelectionConfig(), threads: int = DEFAULT_THREADS) -> SelectionTrace:
    """
    Compute the correlation table of ``d`` and run the three selection steps.

    Raises:
        DataError: No features, unlabeled data or a single class
    """
    return SelectionService(threads).select(d, cfg)


def apply_selection(d: Dataset, trace: SelectionTrace) -> Dataset:
    """Project ``d`` onto the selected features, in selection order."""
    if not trace.a6:
        raise DataError("selection kept no features")
    return d.subset_features(trace.a6)


class SelectionService:
    """
    Feature selection with the correlation statistics cached per dataset.

    Statistics are the expensive part of a selection; the selection steps
    themselves only compare numbers. The service keeps every table it computed,
    keyed by dataset fingerprint and bin count, so trying other threshold
    options on the same data costs no second pass over it.
    """

    def __init__(self, threads: int = DEFAULT_THREADS):
        """
        Initialize the service.

        Args:
            threads: Worker cap for computing statistics
        """
        self.threads = threads
        self._tables: Dict[Tuple[str, int], CorrelationTable] = {}
        logger.debug(f"Initializing SelectionService with {threads} threads")

    def correlation_table(self, d: Dataset, bins: int) -> CorrelationTable:
        if d.n_features == 0:
            raise DataError("dataset has no features")
        key = (d.fingerprint(), bins)
        if key not in self._tables:
            self._tables[key] = correlation_table(d, bins=bins, threads=self.threads)
        else:
            logger.debug(f"Reusing statistics of dataset {key[0][:12]} ({bins} bins)")
        return self._tables[key]

    def select(self, d: Dataset, cfg: SelectionConfig = SelectionConfig()) -> SelectionTrace:
        """
        Select features of ``d``.

        Raises:
            DataError: No features, unlabeled data or a single class
        """
        return select_from_table(self.correlation_table(d, cfg.bins), cfg)

    def reselect(self, trace: SelectionTrace, cfg: SelectionConfig) -> SelectionTrace:
        """
        Rerun the three steps on the statistics stored in ``trace`` under other threshold options.

        The stored statistics fix the bin count, so ``cfg.bins`` is replaced by the trace's.

        Raises:
            DataError: The trace carries no statistics
        """
        if trace.table is None:
            raise DataError("selection trace carries no statistics to reselect from")
        if cfg.bins != trace.table.bins:
            logger.info(f"Keeping the trace's {trace.table.bins} bins instead of {cfg.bins}")
            cfg = SelectionConfig.from_dict({**cfg.to_dict(), "bins": trace.table.bins})
        return select_from_table(trace.table, cfg)
