from __future__ import annotations

from typing import Tuple, TypeVar

import numpy as np
import pandas as pd

TRAIN_WEEKS = 5
TEST_WEEKS = 3

Table = TypeVar("Table", pd.DataFrame, np.ndarray)


def chunk_mask(n_rows: int, train_weeks: int = TRAIN_WEEKS, test_weeks: int = TEST_WEEKS) -> np.ndarray:
    """True for rows in a training chunk: 7*train_weeks days train, 7*test_weeks days test, repeating."""
    if train_weeks < 1 or test_weeks < 1:
        raise ValueError("chunk lengths must be at least one week")
    cycle = 7 * (train_weeks + test_weeks)
    return (np.arange(n_rows) % cycle) < 7 * train_weeks


def chunk_split(
    table: Table, train_weeks: int = TRAIN_WEEKS, test_weeks: int = TEST_WEEKS
) -> Tuple[Table, Table]:
    if len(table) == 0:
        raise ValueError("cannot split an empty table")
    mask = chunk_mask(len(table), train_weeks, test_weeks)
    if isinstance(table, pd.DataFrame):
        return table.iloc[mask], table.iloc[~mask]
    return table[mask], table[~mask]


__all__ = ["TEST_WEEKS", "TRAIN_WEEKS", "chunk_mask", "chunk_split"]
