from __future__ import annotations

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class TaskKind(str, Enum):
    EXACT = "ExactRediscovery"
    FEATURE_SELECTION = "FeatureSelection"
    LOCAL_OPTIMA = "LocalOptima"
    EXTRAPOLATION = "Extrapolation"
    NOISE = "NoiseSensitivity"


class Difficulty(str, Enum):
    EASIER = "Easier"
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


ADMISSIBLE_DIFFICULTIES: Dict[TaskKind, Tuple[Difficulty, ...]] = {
    TaskKind.EXACT: (Difficulty.EASIER, Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    TaskKind.FEATURE_SELECTION: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    TaskKind.LOCAL_OPTIMA: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    TaskKind.EXTRAPOLATION: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
    TaskKind.NOISE: (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD),
}

Interval = Tuple[float, float]


class TaskSpec(BaseModel):
    """Full recipe for one synthetic dataset pair (train + test)."""

    task: TaskKind
    difficulty: Difficulty
    noise_ratio: float = Field(default=0.0, description="Noise ratio applied to the train target")
    n_train: int = Field(default=1000)
    n_test: int = Field(default=1000)
    domain: List[Interval] = Field(default_factory=list, description="Per-variable train interval")
    test_domain: Optional[List[Interval]] = Field(default=None, description="Test interval when it differs")
    seed: int = Field(default=0)
    include_sine: bool = Field(default=True, description="Extrapolation only: keep the sine component")
    assumptions: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self) -> "TaskSpec":
        if not (0.0 <= self.noise_ratio < 1.0):
            raise ValueError(f"noise_ratio must lie in [0, 1), got {self.noise_ratio}")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be >= 1")
        if self.difficulty not in ADMISSIBLE_DIFFICULTIES[self.task]:
            raise ValueError(f"{self.difficulty.value} is not a difficulty of {self.task.value}")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")
        for lo, hi in list(self.domain) + list(self.test_domain or []):
            if not lo <= hi:
                raise ValueError(f"empty interval ({lo}, {hi})")
        return self

    @property
    def dataset_id(self) -> str:
        return f"{self.task.value}-{self.difficulty.value}-s{self.seed}"
