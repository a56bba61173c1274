"""Real-world forecasting track: daily series in, PMLB-style feature tables and trust-weighted scores out."""

from realworld.features import extract_features, to_dataset
from realworld.ingest import SERIES_COLUMNS, SeriesFrame, read_series_csv
from realworld.preprocess import clean_outliers, ewma, prepare
from realworld.split import chunk_split
from realworld.trust import mean_trust, read_ratings, realworld_score

__all__ = [
    "SERIES_COLUMNS",
    "SeriesFrame",
    "chunk_split",
    "clean_outliers",
    "ewma",
    "extract_features",
    "mean_trust",
    "prepare",
    "read_ratings",
    "read_series_csv",
    "realworld_score",
    "to_dataset",
]
