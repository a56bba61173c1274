from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from errors import DatasetIoError, SchemaError

logger = logging.getLogger(__name__)

DATE_COLUMN = "date"
SERIES_COLUMNS = ("cases", "hospitalizations", "deaths")


@dataclass(slots=True)
class SeriesFrame:
    """Daily counts for one location, indexed by contiguous calendar days."""

    data: pd.DataFrame

    def __post_init__(self) -> None:
        missing = [c for c in SERIES_COLUMNS if c not in self.data.columns]
        if missing:
            raise SchemaError(f"series frame lacks columns {missing}")
        index = self.data.index
        if not isinstance(index, pd.DatetimeIndex):
            raise SchemaError("series frame must be indexed by date")
        if len(index) > 1:
            steps = np.diff(index.values).astype("timedelta64[D]").astype(int)
            if np.any(steps != 1):
                raise SchemaError("dates must increase by exactly one day")
        values = self.data[list(SERIES_COLUMNS)].to_numpy(dtype=float)
        if np.any(~np.isfinite(values)):
            raise SchemaError("series values must be finite")
        if np.any(values < 0):
            raise SchemaError("series values must be non-negative")
        self.data = self.data[list(SERIES_COLUMNS)].astype(float)

    def __len__(self) -> int:
        return len(self.data)

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.data.index

    def series(self, name: str) -> pd.Series:
        if name not in SERIES_COLUMNS:
            raise SchemaError(f"unknown series {name!r}; expected one of {SERIES_COLUMNS}")
        return self.data[name]

    @classmethod
    def from_arrays(cls, start: str, cases, hospitalizations, deaths) -> "SeriesFrame":
        n = len(cases)
        frame = pd.DataFrame(
            {"cases": cases, "hospitalizations": hospitalizations, "deaths": deaths},
            index=pd.date_range(start, periods=n, freq="D", name=DATE_COLUMN),
        )
        return cls(frame)


def read_series_csv(path: Union[str, Path]) -> SeriesFrame:
    """Load ``date,cases,hospitalizations,deaths`` rows (ISO dates, one row per day)."""
    src = Path(path)
    if not src.exists():
        raise DatasetIoError(f"series file not found: {src}")
    try:
        frame = pd.read_csv(src)
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{src} is empty") from exc
    missing = [c for c in (DATE_COLUMN, *SERIES_COLUMNS) if c not in frame.columns]
    if missing:
        raise SchemaError(f"{src} lacks columns {missing}")
    try:
        frame[DATE_COLUMN] = pd.to_datetime(frame[DATE_COLUMN], format="%Y-%m-%d")
        values = frame[list(SERIES_COLUMNS)].apply(pd.to_numeric)
    except ValueError as exc:
        raise SchemaError(f"{src}: {exc}") from exc
    values.index = pd.DatetimeIndex(frame[DATE_COLUMN], name=DATE_COLUMN)
    out = SeriesFrame(values)
    logger.info("loaded %d days from %s (%s .. %s)", len(out), src, out.dates[0].date(), out.dates[-1].date())
    return out


__all__ = ["DATE_COLUMN", "SERIES_COLUMNS", "SeriesFrame", "read_series_csv"]
