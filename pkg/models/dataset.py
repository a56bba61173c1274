from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import FrozenSet, List, Optional, Sequence

import numpy as np

from expr.nodes import Expr, arity
from models.tasks import TaskSpec

TARGET_NAME = "target"


@dataclass(slots=True)
class Dataset:
    """Feature matrix, target vector and the provenance a scorer needs.

    ``relevant_vars`` / ``irrelevant_vars`` hold 0-based column indices; the on-disk
    feature names stay 1-based (x1, x2, ...).
    """

    features: np.ndarray
    target: np.ndarray
    feature_names: List[str]
    target_name: str = TARGET_NAME
    ground_truth: Optional[Expr] = None
    relevant_vars: FrozenSet[int] = field(default_factory=frozenset)
    irrelevant_vars: FrozenSet[int] = field(default_factory=frozenset)
    spec: Optional[TaskSpec] = None
    split: str = "train"
    name: str = ""

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim == 1:
            self.features = self.features.reshape(-1, 1)
        self.target = np.asarray(self.target, dtype=float).reshape(-1)
        if self.features.shape[0] != self.target.shape[0]:
            raise ValueError(
                f"features have {self.features.shape[0]} rows but target has {self.target.shape[0]}"
            )
        if len(self.feature_names) != self.features.shape[1]:
            raise ValueError("feature_names length must match the feature count")
        self.relevant_vars = frozenset(self.relevant_vars)
        self.irrelevant_vars = frozenset(self.irrelevant_vars)
        if self.relevant_vars & self.irrelevant_vars:
            raise ValueError("relevant and irrelevant variable sets overlap")
        if self.ground_truth is not None and arity(self.ground_truth) > self.n_features:
            raise ValueError("ground truth references more features than the dataset has")

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def dataset_id(self) -> str:
        if self.spec is not None:
            return self.spec.dataset_id
        return self.name or "external"

    def take(self, rows: Sequence[int], split: Optional[str] = None) -> "Dataset":
        idx = np.asarray(rows, dtype=int)
        return replace(
            self,
            features=self.features[idx],
            target=self.target[idx],
            split=split or self.split,
        )


__all__ = ["Dataset", "TARGET_NAME"]
