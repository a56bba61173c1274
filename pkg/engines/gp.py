"""Generational tree GP with elitism, LM constant tuning and a running Pareto archive.

All random choices come from one generator seeded by ``cfg.seed`` and are drawn in a fixed
order; fitness fan-out only computes numbers, so the outcome does not depend on the worker
count. The search stops at the generation cap or when the budget runs out, whichever
comes first.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from more_itertools import divide

from engines.constants import levenberg_marquardt
from engines.pareto import FrontEntry, ParetoFront, nondominated, rank_and_crowding
from engines.primitives import PrimitiveSet
from expr.evaluate import RAW_KERNELS, OpTable, evaluate_batch
from expr.nodes import Binary, Constant, Expr, Unary, Variable, depth, node_count, replace_subtree, subtrees
from expr.random_tree import Grammar, ramped_half_and_half
from models.configs import ConstantTuning, GpConfig, Objective
from models.dataset import Dataset

logger = logging.getLogger(__name__)

MUTATION_DEPTH = 4


def sse_of(expr: Expr, X: np.ndarray, y: np.ndarray, table: OpTable) -> float:
    values = evaluate_batch(expr, X, table).values
    if not np.all(np.isfinite(values)):
        return math.inf
    r = values - y
    out = float(r @ r)
    return out if math.isfinite(out) else math.inf


def _chunk_sse(exprs: Sequence[Expr], X: np.ndarray, y: np.ndarray, table: OpTable) -> List[float]:
    return [sse_of(e, X, y, table) for e in exprs]


def population_sse(
    exprs: Sequence[Expr], X: np.ndarray, y: np.ndarray, table: OpTable, workers: int = 1
) -> np.ndarray:
    """SSE of every individual, in input order, optionally fanned out over threads."""
    if workers <= 1 or len(exprs) < 2 * workers:
        return np.asarray(_chunk_sse(exprs, X, y, table), dtype=float)
    chunks = [list(part) for part in divide(workers, exprs)]
    parts = Parallel(n_jobs=workers, prefer="threads")(
        delayed(_chunk_sse)(chunk, X, y, table) for chunk in chunks
    )
    return np.asarray([v for part in parts for v in part], dtype=float)


@dataclass(slots=True)
class _Population:
    exprs: List[Expr]
    sse: np.ndarray
    nodes: np.ndarray


class _Search:
    def __init__(self, ds: Dataset, cfg: GpConfig, deadline: float) -> None:
        self.cfg = cfg
        self.X = ds.features
        self.y = ds.target
        self.deadline = deadline
        self.rng = np.random.default_rng(cfg.seed)
        self.pset = PrimitiveSet.from_config(cfg)
        self.table = self.pset.kernels
        self.grammar: Grammar = self.pset.grammar(ds.n_features, cfg.init_max_depth)
        self.front = ParetoFront()

    # --- bookkeeping -------------------------------------------------------------------

    def out_of_time(self) -> bool:
        return time.monotonic() >= self.deadline

    def within_caps(self, e: Expr) -> bool:
        return node_count(e) <= self.cfg.max_nodes and depth(e) <= self.cfg.max_depth

    def evaluate(self, exprs: List[Expr]) -> _Population:
        sse = population_sse(exprs, self.X, self.y, self.table, self.cfg.workers)
        nodes = np.asarray([node_count(e) for e in exprs], dtype=int)
        return _Population(exprs, sse, nodes)

    def archive(self, pop: _Population) -> None:
        best_per_size = {}
        for i, (s, n) in enumerate(zip(pop.sse, pop.nodes)):
            if math.isfinite(s) and (n not in best_per_size or s < pop.sse[best_per_size[n]]):
                best_per_size[n] = i
        self.front.update(FrontEntry.of(pop.exprs[i], pop.sse[i]) for i in sorted(best_per_size.values()))

    def elite_index(self, pop: _Population) -> int:
        return int(np.lexsort((pop.nodes, pop.sse))[0])

    # --- selection ---------------------------------------------------------------------

    def tournament(self, pop: _Population, rank: Optional[np.ndarray], crowd: Optional[np.ndarray]) -> int:
        picks = self.rng.integers(len(pop.exprs), size=self.cfg.tournament_size)
        if self.cfg.objective is Objective.BI_OBJECTIVE and rank is not None and crowd is not None:
            keys = (picks, -crowd[picks], rank[picks])
        elif self.cfg.objective is Objective.SSE_SIZE_TIEBREAK:
            keys = (picks, pop.nodes[picks], pop.sse[picks])
        else:
            keys = (picks, pop.sse[picks])
        return int(picks[np.lexsort(keys)[0]])

    # --- variation ---------------------------------------------------------------------

    def crossover(self, a: Expr, b: Expr) -> Expr:
        i = int(self.rng.integers(node_count(a)))
        donors = subtrees(b)
        donor = donors[int(self.rng.integers(len(donors)))]
        return replace_subtree(a, i, donor)

    def subtree_mutation(self, e: Expr) -> Expr:
        i = int(self.rng.integers(node_count(e)))
        fresh = self.grammar.grow(self.rng, max_depth=min(MUTATION_DEPTH, self.cfg.max_depth))
        return replace_subtree(e, i, fresh)

    def point_mutation(self, e: Expr) -> Expr:
        nodes = subtrees(e)
        i = int(self.rng.integers(len(nodes)))
        node = nodes[i]
        if isinstance(node, Constant):
            v = node.value
            new: Expr = Constant(v + float(self.rng.normal(0.0, 0.1 * (1.0 + abs(v)))))
        elif isinstance(node, Variable):
            new = self.grammar.leaf(self.rng)
        elif isinstance(node, Unary):
            ops = self.pset.unary or (node.op,)
            new = Unary(ops[int(self.rng.integers(len(ops)))], node.child)
        else:
            ops = self.pset.binary
            new = Binary(ops[int(self.rng.integers(len(ops)))], node.left, node.right)
        return replace_subtree(e, i, new)

    def offspring(self, pop: _Population, rank, crowd) -> Expr:
        parent = pop.exprs[self.tournament(pop, rank, crowd)]
        child = parent
        if self.rng.random() < self.cfg.p_crossover:
            other = pop.exprs[self.tournament(pop, rank, crowd)]
            child = self.crossover(child, other)
        if self.rng.random() < self.cfg.p_mutation:
            if self.rng.random() < 0.5:
                child = self.subtree_mutation(child)
            else:
                child = self.point_mutation(child)
        return child if self.within_caps(child) else parent

    # --- constant tuning ---------------------------------------------------------------

    def tune(self, pop: _Population) -> None:
        finite = np.flatnonzero(np.isfinite(pop.sse))
        if finite.size == 0:
            return
        count = max(1, math.ceil(self.cfg.tune_fraction * len(pop.exprs)))
        order = finite[np.lexsort((pop.nodes[finite], pop.sse[finite]))][:count]
        for i in order:
            if self.out_of_time():
                break
            tuned = levenberg_marquardt(
                pop.exprs[i], self.X, self.y, iters=self.cfg.lm_iterations,
                table=self.table, deadline=self.deadline,
            )
            if tuned is pop.exprs[i]:
                continue
            s = sse_of(tuned, self.X, self.y, self.table)
            if s <= pop.sse[i]:
                pop.exprs[i] = tuned
                pop.sse[i] = s

    # --- main loop ---------------------------------------------------------------------

    def initial(self) -> _Population:
        exprs = ramped_half_and_half(self.grammar, self.cfg.population_size, self.rng)
        exprs = [e if self.within_caps(e) else self.grammar.leaf(self.rng) for e in exprs]
        return self.evaluate(exprs)

    def environmental(self, pop: _Population, children: _Population) -> _Population:
        exprs = pop.exprs + children.exprs
        sse = np.concatenate([pop.sse, children.sse])
        nodes = np.concatenate([pop.nodes, children.nodes])
        rank, crowd = rank_and_crowding(np.column_stack([sse, nodes.astype(float)]))
        elite = int(np.lexsort((nodes, sse))[0])
        order = [elite] + [int(i) for i in np.lexsort((-crowd, rank)) if i != elite]
        keep = order[: len(pop.exprs)]
        return _Population([exprs[i] for i in keep], sse[keep], nodes[keep])

    def run(self) -> ParetoFront:
        cfg = self.cfg
        pop = self.initial()
        self.archive(pop)
        self.front.history.append(float(np.min(pop.sse)))
        gen = 0
        while gen < cfg.generations and not self.out_of_time():
            bi = cfg.objective is Objective.BI_OBJECTIVE
            rank = crowd = None
            if bi:
                rank, crowd = rank_and_crowding(np.column_stack([pop.sse, pop.nodes.astype(float)]))
            elite = pop.exprs[self.elite_index(pop)]
            children: List[Expr] = [] if bi else [elite]
            target = cfg.population_size
            while len(children) < target:
                children.append(self.offspring(pop, rank, crowd))
                if len(children) % 64 == 0 and self.out_of_time():
                    break
            if len(children) < target:
                break
            nxt = self.evaluate(children)
            if bi:
                nxt = self.environmental(pop, nxt)
            gen += 1
            if cfg.constant_tuning is ConstantTuning.LM and gen % cfg.tune_every == 0:
                self.tune(nxt)
            pop = nxt
            self.archive(pop)
            best = float(np.min(pop.sse))
            self.front.history.append(best)
            logger.debug("gen %d best_sse=%.6g front=%d", gen, best, len(self.front))
        if gen < cfg.generations:
            logger.warning("budget ended the search after %d of %d generations", gen, cfg.generations)
        self.front.generations = gen
        return self.front


def lower_front(front: ParetoFront, pset: PrimitiveSet, X: np.ndarray, y: np.ndarray) -> ParetoFront:
    """Rewrite a search-semantics front into RAW expressions and re-filter for dominance."""
    lowered = []
    for entry in front.entries:
        expr = pset.lower(entry.expr)
        lowered.append(FrontEntry.of(expr, sse_of(expr, X, y, RAW_KERNELS)))
    entries = nondominated([e for e in lowered if math.isfinite(e.sse)])
    if not entries:
        mean = Constant(float(np.mean(y)))
        entries = [FrontEntry.of(mean, sse_of(mean, X, y, RAW_KERNELS))]
    return ParetoFront(entries=entries, history=list(front.history), generations=front.generations)


def fit_gp(ds: Dataset, cfg: Optional[GpConfig] = None, budget_seconds: float = 60.0) -> ParetoFront:
    """Run GP on the training data and return the RAW-semantics Pareto front."""
    if budget_seconds <= 0:
        raise ValueError("budget_seconds must be > 0")
    cfg = cfg or GpConfig()
    started = time.monotonic()
    search = _Search(ds, cfg, started + budget_seconds)
    front = lower_front(search.run(), search.pset, ds.features, ds.target)
    best = front.best()
    logger.info(
        "fit done: %d generations in %.1fs, front=%d, best_sse=%.6g (%d nodes)",
        front.generations, time.monotonic() - started, len(front), best.sse, best.nodes,
    )
    return front


__all__ = ["fit_gp", "lower_front", "population_sse", "sse_of"]
