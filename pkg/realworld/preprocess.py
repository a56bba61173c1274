"""Outlier cleaning and EWMA smoothing for daily series."""

from __future__ import annotations

import logging
from typing import Union

import numpy as np
import pandas as pd

from errors import InvalidAlpha
from realworld.ingest import SERIES_COLUMNS, SeriesFrame

logger = logging.getLogger(__name__)

OUTLIER_WINDOW = 7
OUTLIER_K = 4.0
# span of one week: 2 / (7 + 1)
DEFAULT_ALPHA = 0.25

SeriesLike = Union[pd.Series, np.ndarray, list]


def _as_series(values: SeriesLike) -> pd.Series:
    if isinstance(values, pd.Series):
        return values.astype(float)
    return pd.Series(np.asarray(values, dtype=float))


def clean_outliers(series: SeriesLike, window_days: int = OUTLIER_WINDOW, k: float = OUTLIER_K) -> pd.Series:
    """Replace points more than ``k`` sigma from their trailing window mean by the window median.

    The window holds the ``window_days`` days before the point (the point itself excluded),
    sigma is the population standard deviation of that window, and the first
    ``window_days`` points are never touched. One left-to-right pass: a replaced value is
    written back before later windows are taken, so an earlier spike cannot mask a later one.
    """
    s = _as_series(series)
    values = s.to_numpy(copy=True)
    replaced = 0
    for t in range(window_days, len(values)):
        window = values[t - window_days : t]
        mean = window.mean()
        if abs(values[t] - mean) > k * window.std():
            values[t] = np.median(window)
            replaced += 1
    if replaced:
        logger.info("replacing %d outliers", replaced)
    return pd.Series(values, index=s.index, name=s.name)


def ewma(series: SeriesLike, alpha: float = DEFAULT_ALPHA) -> pd.Series:
    """s0 = x0, st = alpha * xt + (1 - alpha) * s(t-1)."""
    if not (0.0 < alpha <= 1.0):
        raise InvalidAlpha(f"alpha must lie in (0, 1], got {alpha}")
    return _as_series(series).ewm(alpha=alpha, adjust=False).mean()


def prepare(
    frame: SeriesFrame,
    window_days: int = OUTLIER_WINDOW,
    k: float = OUTLIER_K,
    alpha: float = DEFAULT_ALPHA,
) -> SeriesFrame:
    """Clean then smooth every series of the frame."""
    data = pd.DataFrame(index=frame.dates)
    for name in SERIES_COLUMNS:
        data[name] = ewma(clean_outliers(frame.series(name), window_days, k), alpha).to_numpy()
    return SeriesFrame(data)


__all__ = ["DEFAULT_ALPHA", "OUTLIER_K", "OUTLIER_WINDOW", "clean_outliers", "ewma", "prepare"]
