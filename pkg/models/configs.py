from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from models.tasks import Difficulty, TaskKind


class DivisionPolicy(str, Enum):
    PROTECTED = "protected"
    ANALYTIC_QUOTIENT = "analytic-quotient"
    RAW = "raw"


class ConstantTuning(str, Enum):
    NONE = "none"
    LM = "lm-every-k"


class Objective(str, Enum):
    SSE = "sse"
    SSE_SIZE_TIEBREAK = "sse+size"
    BI_OBJECTIVE = "bi-objective"


class SelectionPolicy(str, Enum):
    BEST_TEST_R2 = "best-test-r2"
    KNEE = "knee"
    SMALLEST_WITHIN_EPS = "smallest-within-eps"


class EngineKind(str, Enum):
    GP = "gp"
    LINEAR = "linear"
    CONSTANT = "constant"
    ORACLE = "oracle"


class TrackKind(str, Enum):
    QUALIFICATION = "qualification"
    SYNTHETIC = "synthetic"
    REALWORLD = "realworld"


class BudgetPolicy(str, Enum):
    DESK = "desk"
    FULL_SCALE = "full-scale"


DEFAULT_PRIMITIVES: List[str] = ["add", "sub", "mul", "div", "sin", "cos", "exp", "log", "sqrt", "tanh", "erf"]


class GpConfig(BaseModel):
    """Tree-GP settings; defaults are desk-scale engineering choices."""

    population_size: int = Field(default=512)
    generations: int = Field(default=50, description="Generation cap; the budget only cuts a run short")
    tournament_size: int = Field(default=5)
    p_crossover: float = Field(default=0.9)
    p_mutation: float = Field(default=0.2)
    max_depth: int = Field(default=10)
    max_nodes: int = Field(default=50)
    init_max_depth: int = Field(default=4)
    primitives: List[str] = Field(default_factory=lambda: list(DEFAULT_PRIMITIVES))
    division: DivisionPolicy = Field(default=DivisionPolicy.ANALYTIC_QUOTIENT)
    constant_tuning: ConstantTuning = Field(default=ConstantTuning.LM)
    tune_every: int = Field(default=5, description="Generations between LM passes")
    tune_fraction: float = Field(default=0.1, description="Top share of the population tuned")
    lm_iterations: int = Field(default=20)
    objective: Objective = Field(default=Objective.SSE)
    seed: int = Field(default=0)
    workers: int = Field(default=1)

    @model_validator(mode="after")
    def _check(self) -> "GpConfig":
        for name in ("p_crossover", "p_mutation", "tune_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be >= 2")
        for name in (
            "population_size", "generations", "max_depth", "max_nodes", "init_max_depth", "tune_every", "workers",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.init_max_depth > self.max_depth:
            raise ValueError("init_max_depth cannot exceed max_depth")
        return self


class AlgorithmSpec(BaseModel):
    """A named entrant: which engine to run and how to configure it."""

    name: str
    kind: EngineKind = EngineKind.GP
    gp: Optional[GpConfig] = None
    constant_value: Optional[float] = Field(default=None, description="constant engine: fixed prediction")
    selection: SelectionPolicy = SelectionPolicy.KNEE
    epsilon: float = Field(default=0.01, description="smallest-within-eps: relative SSE slack")


class TaskSelection(BaseModel):
    task: TaskKind
    difficulties: Optional[List[Difficulty]] = None


class TrackConfig(BaseModel):
    """One track run, loaded from a JSON config file."""

    track: TrackKind
    algorithms: List[AlgorithmSpec]
    runs: int = Field(default=10)
    budget_seconds: Optional[float] = Field(default=None, description="None uses the settings default")
    budget_policy: BudgetPolicy = BudgetPolicy.DESK
    seeds: List[int] = Field(default_factory=lambda: [0])
    tasks: Optional[List[TaskSelection]] = Field(default=None, description="synthetic: None means all")
    n_train: int = 1000
    n_test: int = 1000
    datasets: List[str] = Field(default_factory=list, description="qualification: PMLB-format files")
    series_csv: Optional[str] = Field(default=None, description="realworld: daily input CSV")
    ratings_csv: Optional[str] = Field(default=None, description="realworld: trust ratings CSV")
    targets: List[str] = Field(default_factory=lambda: ["cases", "hospitalizations", "deaths"])
    output_dir: Optional[str] = None
    workers: int = 1
    alpha: float = 0.05
    median_first: bool = True

    @model_validator(mode="after")
    def _check(self) -> "TrackConfig":
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.budget_seconds is not None and self.budget_seconds <= 0:
            raise ValueError("budget_seconds must be > 0")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError("algorithm names must be unique")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.alpha not in (0.05, 0.10):
            raise ValueError("alpha must be 0.05 or 0.10")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        return self
