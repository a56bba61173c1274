"""Per-model competition metrics: R², simplicity and the task-specific scores."""

from __future__ import annotations

import math
from typing import AbstractSet, Optional

import numpy as np

from errors import DegenerateTarget
from expr.evaluate import predict
from expr.nodes import Expr, variables
from models.dataset import Dataset
from models.records import EquivalenceVerdict
from models.tasks import TaskKind
from symbolic.simplify import simplified_node_count, simplify


def r2(y: np.ndarray, yhat: np.ndarray) -> float:
    """Coefficient of determination; any non-finite prediction scores -inf."""
    y = np.asarray(y, dtype=float).reshape(-1)
    yhat = np.asarray(yhat, dtype=float).reshape(-1)
    if y.size == 0 or y.shape != yhat.shape:
        raise ValueError(f"r2 needs equal nonzero lengths, got {y.size} and {yhat.size}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateTarget("target has zero variance")
    if not np.all(np.isfinite(yhat)):
        return -math.inf
    ss_res = float(np.sum((y - yhat) ** 2))
    return 1.0 - ss_res / ss_tot


def model_r2(expr: Optional[Expr], ds: Dataset) -> float:
    if expr is None:
        return -math.inf
    return r2(ds.target, predict(expr, ds.features))


def round_half_away(value: float, digits: int = 1) -> float:
    scale = 10.0**digits
    out = math.copysign(math.floor(abs(value) * scale + 0.5) / scale, value)
    return out + 0.0


def simplicity_from_nodes(s: int) -> float:
    if s < 1:
        raise ValueError("node count must be >= 1")
    return round_half_away(-math.log(s) / math.log(5.0), 1)


def simplicity_score(expr: Expr) -> float:
    """round(-log5(s), 1) for s simplified nodes; 0 is the best possible value."""
    return simplicity_from_nodes(simplified_node_count(expr))


def feature_select_score(
    expr: Expr, relevant_vars: AbstractSet[int], irrelevant_vars: AbstractSet[int]
) -> float:
    """(T - B) / F clamped to [0, 1], judging variable use on the simplified model."""
    if not irrelevant_vars:
        raise ValueError("feature_select_score needs at least one irrelevant variable")
    used = variables(simplify(expr))
    false_selected = len(used & set(irrelevant_vars))
    score = (len(relevant_vars) - false_selected) / len(irrelevant_vars)
    return min(1.0, max(0.0, score))


def task_score(
    task: Optional[TaskKind],
    expr: Optional[Expr],
    test: Dataset,
    verdict: Optional[EquivalenceVerdict] = None,
) -> Optional[float]:
    """Task-specific criterion; None when the task defines none."""
    if task is TaskKind.EXACT:
        return 1.0 if verdict is not None and verdict.exact else 0.0
    if task in (TaskKind.FEATURE_SELECTION, TaskKind.LOCAL_OPTIMA):
        if expr is None:
            return 0.0
        return feature_select_score(expr, test.relevant_vars, test.irrelevant_vars)
    if task is TaskKind.EXTRAPOLATION:
        return model_r2(expr, test)
    return None


__all__ = [
    "feature_select_score",
    "model_r2",
    "r2",
    "round_half_away",
    "simplicity_from_nodes",
    "simplicity_score",
    "task_score",
]
