"""Forecasting feature table: lags, deltas to the current day and running totals per series."""

from __future__ import annotations

import logging
from typing import List, Sequence

import numpy as np
import pandas as pd

from errors import TooShort
from models.dataset import TARGET_NAME, Dataset
from realworld.ingest import SERIES_COLUMNS, SeriesFrame

logger = logging.getLogger(__name__)

DEFAULT_LAGS = (1, 2)


def feature_names(lags: Sequence[int] = DEFAULT_LAGS, series: Sequence[str] = SERIES_COLUMNS) -> List[str]:
    names: List[str] = []
    for s in series:
        names.extend(f"{s}_lag{i}" for i in lags)
        names.extend(f"{s}_delta{i}" for i in lags)
        names.append(f"{s}_total")
    return names


def extract_features(frame: SeriesFrame, target: str, lags: Sequence[int] = DEFAULT_LAGS) -> pd.DataFrame:
    """One row per day t with full history; the label is the target series on day t + 1.

    Features for every series j: x[t-i] for each lag, x[t] - x[t-i] for each lag and the
    cumulative sum up to t. The frame index is the label day.
    """
    lags = sorted(set(int(i) for i in lags))
    if not lags or lags[0] < 1:
        raise ValueError("lags must be positive integers")
    max_lag = lags[-1]
    n = len(frame)
    if n < max_lag + 2:
        raise TooShort(f"need at least {max_lag + 2} days for lags {lags}, got {n}")
    label = frame.series(target)

    columns = {}
    for name in SERIES_COLUMNS:
        s = frame.series(name)
        for i in lags:
            columns[f"{name}_lag{i}"] = s.shift(i)
        for i in lags:
            columns[f"{name}_delta{i}"] = s - s.shift(i)
        columns[f"{name}_total"] = s.cumsum()
    table = pd.DataFrame(columns, index=frame.dates)[feature_names(lags)]
    table[TARGET_NAME] = label.shift(-1)
    # rows t = max_lag .. n - 2
    table = table.iloc[max_lag : n - 1]
    table.index = frame.dates[max_lag + 1 : n]
    table.index.name = "label_date"
    logger.debug("extracted %d rows x %d features for %s", len(table), table.shape[1] - 1, target)
    return table


def to_dataset(table: pd.DataFrame, name: str, split: str = "train") -> Dataset:
    names = [c for c in table.columns if c != TARGET_NAME]
    return Dataset(
        features=table[names].to_numpy(dtype=float),
        target=table[TARGET_NAME].to_numpy(dtype=float),
        feature_names=names,
        split=split,
        name=name,
    )


__all__ = ["DEFAULT_LAGS", "extract_features", "feature_names", "to_dataset"]
