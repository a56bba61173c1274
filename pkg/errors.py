"""Exception hierarchy shared by every package in the competition harness."""

from __future__ import annotations

from typing import Iterable, List, Sequence


class CompetitionError(RuntimeError):
    """Base wrapper for harness-related runtime issues."""


class ConfigurationError(CompetitionError, ValueError):
    """Raised when a track, engine or task configuration is unusable."""


class ParseError(CompetitionError, ValueError):
    """Malformed infix model string."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at offset {position}")
        self.position = position


class DomainViolation(CompetitionError, ArithmeticError):
    """A partial operator was applied outside its domain."""


class NumericOverflow(CompetitionError, ArithmeticError):
    """Finite operands produced a non-finite value."""


class InsufficientDomain(CompetitionError):
    """Too few valid probe points to judge equivalence."""


class InvalidRatio(CompetitionError, ValueError):
    """Noise ratio outside [0, 1)."""


class SchemaError(CompetitionError, ValueError):
    """Dataset or input table does not follow the expected columns."""


class DatasetIoError(CompetitionError, OSError):
    """Reading or writing a dataset file failed."""


class DegenerateTarget(CompetitionError, ValueError):
    """R² is undefined for a target with zero variance."""


class NonPositiveRank(CompetitionError, ValueError):
    """Harmonic aggregation requires strictly positive ranks."""


class UnsupportedK(CompetitionError, ValueError):
    """No tabled Nemenyi constant for this many algorithms."""


class TooShort(CompetitionError, ValueError):
    """Series too short for the requested feature history."""


class InvalidAlpha(CompetitionError, ValueError):
    """Smoothing factor outside (0, 1]."""


class MissingRecords(CompetitionError):
    """Some (algorithm, dataset, run) cells have no record."""

    def __init__(self, holes: Iterable[str]) -> None:
        self.holes: List[str] = sorted(holes)
        preview = ", ".join(self.holes[:10])
        more = "" if len(self.holes) <= 10 else f" (+{len(self.holes) - 10} more)"
        super().__init__(f"Missing records: {preview}{more}")


class MissingTrust(CompetitionError):
    """Some representative models have no trust rating."""

    def __init__(self, model_ids: Sequence[str]) -> None:
        self.model_ids = sorted(model_ids)
        super().__init__("Unrated models: " + ", ".join(self.model_ids))


class BudgetExceeded(CompetitionError):
    """A run did not finish inside its wall-clock budget plus grace."""

    def __init__(self, wall_seconds: float, budget_seconds: float) -> None:
        self.wall_seconds = wall_seconds
        self.budget_seconds = budget_seconds
        super().__init__(f"Run exceeded budget: {wall_seconds:.2f}s > {budget_seconds:.2f}s")


class RankDeficient(UserWarning):
    """Least-squares design matrix lacks full column rank; ridge fallback used."""


__all__ = [
    "BudgetExceeded",
    "CompetitionError",
    "ConfigurationError",
    "DatasetIoError",
    "DegenerateTarget",
    "DomainViolation",
    "InsufficientDomain",
    "InvalidAlpha",
    "InvalidRatio",
    "MissingRecords",
    "MissingTrust",
    "NonPositiveRank",
    "NumericOverflow",
    "ParseError",
    "RankDeficient",
    "SchemaError",
    "TooShort",
    "UnsupportedK",
]
