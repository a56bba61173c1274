from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class VerdictKind(str, Enum):
    EXACT_ADDITIVE = "ExactAdditive"
    EXACT_MULTIPLICATIVE = "ExactMultiplicative"
    NOT_EQUIVALENT = "NotEquivalent"


class EquivalenceVerdict(BaseModel):
    kind: VerdictKind
    constant: Optional[float] = None
    evidence: int = Field(default=0, description="Probe points used; 0 for a symbolic short-circuit")

    @model_validator(mode="after")
    def _check(self) -> "EquivalenceVerdict":
        if self.kind is VerdictKind.NOT_EQUIVALENT and self.constant is not None:
            raise ValueError("NotEquivalent carries no constant")
        if self.kind is VerdictKind.EXACT_MULTIPLICATIVE and not self.constant:
            raise ValueError("multiplicative constant must be nonzero")
        return self

    @property
    def exact(self) -> bool:
        return self.kind is not VerdictKind.NOT_EQUIVALENT


class RunStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"
    BUDGET_EXCEEDED = "budget_exceeded"


class ModelRecord(BaseModel):
    """What one fit returned: the exchange string plus fit-side metrics."""

    algorithm: str
    dataset: str
    seed: int
    run: int = 0
    expression: Optional[str] = None
    train_r2: float = -math.inf
    test_r2: float = -math.inf
    nodes_raw: Optional[int] = None
    nodes_simplified: Optional[int] = None
    wall_seconds: float = 0.0
    # ran past the budget but inside the grace period
    over_budget: bool = False
    status: RunStatus = RunStatus.OK
    error: Optional[str] = None


class ScoreRecord(BaseModel):
    """One (algorithm, dataset, run) row of the score table."""

    algorithm: str
    dataset: str
    run: int
    r2_test: float
    simplicity: float
    task_score: Optional[float] = None
    exact: Optional[EquivalenceVerdict] = None
    wall_seconds: float = 0.0
    status: RunStatus = RunStatus.OK
    expression: Optional[str] = None
    nodes_simplified: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "ScoreRecord":
        if self.r2_test > 1.0 + 1e-12:
            raise ValueError(f"r2_test cannot exceed 1, got {self.r2_test}")
        if self.simplicity > 0.0:
            raise ValueError("simplicity is never positive")
        return self

    @property
    def cell(self) -> str:
        return f"{self.algorithm}/{self.dataset}/{self.run}"


class AlgorithmSummary(BaseModel):
    algorithm: str
    aggregates: List[float] = Field(default_factory=list, description="Per-dataset harmonic aggregate")
    median: float
    mean: float
    mean_rank: Optional[float] = None


class RankReport(BaseModel):
    """Ranks per (dataset, criterion), harmonic aggregates and Friedman/Nemenyi statistics."""

    scope: str = "track"
    algorithms: List[str]
    datasets: List[str]
    criteria: List[str]
    ranks: Dict[str, Dict[str, Dict[str, float]]] = Field(default_factory=dict)
    aggregate: Dict[str, Dict[str, float]] = Field(default_factory=dict)
    summaries: List[AlgorithmSummary] = Field(default_factory=list)
    winner: Optional[str] = None
    friedman_stat: Optional[float] = None
    friedman_p: Optional[float] = None
    critical_difference: Optional[float] = None
    alpha: float = 0.05
    groups: List[List[str]] = Field(default_factory=list)
    median_first: bool = True

    def summary_for(self, algorithm: str) -> AlgorithmSummary:
        for item in self.summaries:
            if item.algorithm == algorithm:
                return item
        raise KeyError(algorithm)


class TrustRating(BaseModel):
    model_id: str
    rating: int
    rater: str = "expert"
    timestamp: str = ""

    @model_validator(mode="after")
    def _check(self) -> "TrustRating":
        if self.rating not in (1, 2, 3, 4, 5):
            raise ValueError(f"rating must be an integer 1..5, got {self.rating}")
        return self


class RealworldEntry(BaseModel):
    """Inputs of the real-world final score for one algorithm."""

    algorithm: str
    model_id: str
    r2_test: float
    simplicity: float
    trust: Optional[float] = None


class RealworldScore(BaseModel):
    algorithm: str
    model_id: str
    r2_test: float
    simplicity: float
    trust: float
    rank_r2: float
    rank_simplicity: float
    rank_trust: float
    score: float
    raw_harmonic: float


class QualificationResult(BaseModel):
    report: RankReport
    median_r2: Dict[str, Dict[str, float]] = Field(default_factory=dict, description="dataset -> algorithm -> median R²")
    median_rank: Dict[str, float] = Field(default_factory=dict)
    baseline: str = "linear"
    disqualified: List[str] = Field(default_factory=list)


class RecoveryRate(BaseModel):
    """Exact-rediscovery success of one algorithm at one (task, difficulty) level."""

    algorithm: str
    level: str
    datasets: int
    runs: int
    any_run: float = Field(description="Share of datasets where at least one run was exact")
    best_run: float = Field(description="Share of datasets whose best-R² run was exact")
    per_run: float = Field(description="Share of all runs that were exact")


class Showcase(BaseModel):
    """The single returned model with the highest harmonic aggregate at one level."""

    level: str
    algorithm: str
    dataset: str
    run: int
    aggregate: float
    record: ScoreRecord
