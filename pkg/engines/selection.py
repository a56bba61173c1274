"""Pick one model from a Pareto front."""

from __future__ import annotations

import math
from typing import Optional

from errors import DegenerateTarget
from eval.metrics import model_r2
from expr.nodes import Expr
from models.configs import SelectionPolicy
from models.dataset import Dataset
from engines.pareto import FrontEntry, ParetoFront


def _tiebreak(entry: FrontEntry):
    return (entry.nodes, entry.text)


def _knee(front: ParetoFront) -> FrontEntry:
    entries = sorted(front.entries, key=_tiebreak)
    best, best_gain = entries[0], -math.inf
    for prev, cur in zip(entries, entries[1:]):
        grow = cur.nodes - prev.nodes
        if grow <= 0:
            continue
        gain = (prev.sse - cur.sse) / grow
        if gain > best_gain:
            best, best_gain = cur, gain
    return best


def _smallest_within(front: ParetoFront, epsilon: float) -> FrontEntry:
    floor = min(e.sse for e in front.entries)
    limit = floor * (1.0 + epsilon) + 1e-12
    return min((e for e in front.entries if e.sse <= limit), key=_tiebreak)


def _best_test(front: ParetoFront, test: Dataset) -> FrontEntry:
    def score(e: FrontEntry) -> float:
        try:
            value = model_r2(e.expr, test)
        except DegenerateTarget:
            value = -e.sse
        return value if math.isfinite(value) else -math.inf

    return min(front.entries, key=lambda e: (-score(e), e.nodes, e.text))


def select_entry(
    front: ParetoFront,
    policy: SelectionPolicy = SelectionPolicy.KNEE,
    test: Optional[Dataset] = None,
    epsilon: float = 0.01,
) -> FrontEntry:
    if not front.entries:
        raise ValueError("cannot select from an empty front")
    if len(front.entries) == 1:
        return front.entries[0]
    policy = SelectionPolicy(policy)
    if policy is SelectionPolicy.BEST_TEST_R2:
        if test is None:
            raise ValueError("best-test-r2 selection needs a test dataset")
        return _best_test(front, test)
    if policy is SelectionPolicy.SMALLEST_WITHIN_EPS:
        return _smallest_within(front, epsilon)
    return _knee(front)


def select_model(
    front: ParetoFront,
    policy: SelectionPolicy = SelectionPolicy.KNEE,
    test: Optional[Dataset] = None,
    epsilon: float = 0.01,
) -> Expr:
    """Apply ``policy``; ties go to fewer nodes, then the smaller printed form."""
    return select_entry(front, policy, test, epsilon).expr


__all__ = ["select_entry", "select_model"]
