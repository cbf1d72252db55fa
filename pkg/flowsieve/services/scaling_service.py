"""
Z-score standardization: fit on one dataset, apply to any dataset with the same features.
"""
import logging

import numpy as np

from flowsieve.config import DEFAULT_SCALER_DDOF
from flowsieve.errors import ConfigError, DataError
from flowsieve.models.dataset import Dataset
from flowsieve.models.scaler import ScalerParams

logger = logging.getLogger(__name__)


def fit_scaler(d: Dataset, ddof: int = DEFAULT_SCALER_DDOF) -> ScalerParams:
    """
    Fit per-feature mean and standard deviation.

    Both moments are two-pass sums over each feature's column laid out
    contiguously, which numpy reduces by pairwise summation in a fixed order.

    Args:
        d: Dataset to fit on
        ddof: 0 for population standard deviation, 1 for sample

    Returns:
        ScalerParams: Params carrying the fingerprint of ``d``

    Raises:
        DataError: Empty dataset (or fewer than ddof + 1 rows)
    """
    if ddof not in (0, 1):
        raise ConfigError(f"ddof must be 0 or 1, got {ddof}")
    if d.n_rows <= ddof:
        raise DataError(f"cannot fit a scaler on {d.n_rows} rows")
    columns = np.ascontiguousarray(d.X.T)
    mean = columns.sum(axis=1) / d.n_rows
    centered = columns - mean[:, None]
    std = np.sqrt((centered * centered).sum(axis=1) / (d.n_rows - ddof))
    std[columns.min(axis=1) == columns.max(axis=1)] = 0.0
    constant = int((std == 0).sum())
    if constant:
        logger.info(f"{constant} zero-variance features will standardize to 0")
    return ScalerParams(
        feature_names=d.feature_names,
        mean=mean,
        std=std,
        ddof=ddof,
        fit_fingerprint=d.fingerprint(),
    )


def transform(p: ScalerParams, d: Dataset, foreign_ok: bool = False) -> Dataset:
    """
    Standardize ``d`` with ``p``: x' = (x - mean) / std, zero-variance columns -> 0.

    Labels are carried over unchanged. Standardizing an already standardized
    dataset is allowed but logged as a warning, and so is standardizing a
    dataset other than the one ``p`` was fit on unless ``foreign_ok`` is set
    (for instance params fit on the training rows only).

    Raises:
        DataError: Feature names differ from the fitted ones
    """
    if tuple(d.feature_names) != tuple(p.feature_names):
        raise DataError("feature names differ from the ones the scaler was fit on")
    if d.scaled_with is not None:
        logger.warning(
            f"Dataset was already standardized (scaler {d.scaled_with[:12]}); "
            f"applying again is not idempotent, refit instead"
        )
    if p.fit_fingerprint and d.fingerprint() != p.fit_fingerprint:
        message = f"Transforming a dataset other than the one the scaler was fit on ({p.fit_fingerprint[:12]})"
        if foreign_ok:
            logger.info(message)
        else:
            logger.warning(message)

    safe_std = np.where(p.std > 0, p.std, 1.0)
    X = (d.X - p.mean) / safe_std
    X[:, p.std == 0] = 0.0
    return Dataset(feature_names=d.feature_names, X=X, y=d.y, scaled_with=p.fingerprint)
