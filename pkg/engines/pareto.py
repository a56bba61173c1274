"""Pareto archive over (train SSE, node count) plus NSGA-II sorting helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from expr.nodes import Expr, node_count
from expr.parser import print_infix


@dataclass(frozen=True)
class FrontEntry:
    expr: Expr
    sse: float
    nodes: int
    text: str

    @classmethod
    def of(cls, expr: Expr, sse: float) -> "FrontEntry":
        return cls(expr=expr, sse=float(sse), nodes=node_count(expr), text=print_infix(expr))

    def dominates(self, other: "FrontEntry") -> bool:
        return (
            self.sse <= other.sse
            and self.nodes <= other.nodes
            and (self.sse < other.sse or self.nodes < other.nodes)
        )


@dataclass
class ParetoFront:
    """Mutually non-dominated models sorted by node count ascending."""

    entries: List[FrontEntry] = field(default_factory=list)
    history: List[float] = field(default_factory=list)
    generations: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> FrontEntry:
        return self.entries[i]

    def update(self, candidates: Iterable[FrontEntry]) -> None:
        pool = list(self.entries)
        for cand in candidates:
            if math.isfinite(cand.sse):
                pool.append(cand)
        self.entries = nondominated(pool)

    def best(self) -> FrontEntry:
        return min(self.entries, key=lambda e: (e.sse, e.nodes, e.text))


def nondominated(pool: Sequence[FrontEntry]) -> List[FrontEntry]:
    """Keep one entry per (nodes, sse) point, drop dominated ones, sort by size."""
    by_nodes: dict = {}
    for e in pool:
        cur = by_nodes.get(e.nodes)
        if cur is None or (e.sse, e.text) < (cur.sse, cur.text):
            by_nodes[e.nodes] = e
    front: List[FrontEntry] = []
    best_sse = math.inf
    for nodes in sorted(by_nodes):
        e = by_nodes[nodes]
        if e.sse < best_sse:
            front.append(e)
            best_sse = e.sse
    return front


def non_dominated_sort(objectives: np.ndarray) -> List[List[int]]:
    """Fast non-dominated sorting (minimisation) of an (n, m) objective matrix."""
    obj = np.where(np.isnan(objectives), np.inf, objectives)
    le = np.all(obj[:, None, :] <= obj[None, :, :], axis=-1)
    lt = np.any(obj[:, None, :] < obj[None, :, :], axis=-1)
    dominates = le & lt  # [i, j]: i dominates j
    counts = dominates.sum(axis=0)
    fronts: List[List[int]] = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dominates[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(objectives: np.ndarray, front: Sequence[int]) -> np.ndarray:
    idx = np.asarray(front, dtype=int)
    dist = np.zeros(idx.size)
    if idx.size <= 2:
        dist[:] = np.inf
        return dist
    for m in range(objectives.shape[1]):
        vals = objectives[idx, m]
        order = np.argsort(vals, kind="stable")
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[order[-1]] - vals[order[0]]
        if span <= 0 or not np.isfinite(span):
            continue
        for k in range(1, idx.size - 1):
            dist[order[k]] += (vals[order[k + 1]] - vals[order[k - 1]]) / span
    return dist


def rank_and_crowding(objectives: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = objectives.shape[0]
    rank = np.zeros(n, dtype=int)
    crowd = np.zeros(n)
    for r, front in enumerate(non_dominated_sort(objectives)):
        rank[front] = r
        crowd[front] = crowding_distance(objectives, front)
    return rank, crowd


__all__ = [
    "FrontEntry",
    "ParetoFront",
    "crowding_distance",
    "non_dominated_sort",
    "nondominated",
    "rank_and_crowding",
]
