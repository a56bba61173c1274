from __future__ import annotations

import logging
import math
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from errors import ConfigurationError, MissingRecords, NonPositiveRank, UnsupportedK
from eval.critical_difference import friedman_nemenyi
from eval.metrics import model_r2, simplicity_from_nodes, task_score
from expr.nodes import Expr
from expr.parser import print_infix
from models.dataset import Dataset
from models.records import (
    AlgorithmSummary,
    EquivalenceVerdict,
    RankReport,
    RecoveryRate,
    RunStatus,
    ScoreRecord,
    Showcase,
)
from models.tasks import TaskKind
from symbolic.equivalence import safe_verdict
from symbolic.simplify import simplified_node_count

logger = logging.getLogger(__name__)

CRITERIA = ("r2_test", "simplicity", "task_score")


def harmonic_rank(ranks: Sequence[float]) -> float:
    """n / sum(1 / r_i); every rank must be strictly positive."""
    arr = np.asarray(ranks, dtype=float).reshape(-1)
    if arr.size == 0:
        raise NonPositiveRank("no ranks to aggregate")
    if np.any(~(arr > 0)):
        raise NonPositiveRank(f"ranks must be > 0, got {arr.tolist()}")
    return float(arr.size / np.sum(1.0 / arr))


def rank_criterion(values: Sequence[float], higher_better: bool = True) -> np.ndarray:
    """Best value gets rank k, worst gets 1, ties share the average; NaN ranks last."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError("rank_criterion needs at least one value")
    oriented = arr if higher_better else -arr
    oriented = np.where(np.isnan(oriented), -np.inf, oriented)
    return rankdata(oriented, method="average")


def score_record(
    algorithm: str,
    dataset: Dataset,
    run: int,
    expr: Optional[Expr],
    task: Optional[TaskKind] = None,
    wall_seconds: float = 0.0,
    status: RunStatus = RunStatus.OK,
    domain=None,
) -> ScoreRecord:
    """Score one returned model against the test split.

    A run without a usable model (crash, overrun) scores R² = -inf and simplicity -inf.
    """
    failed = status is not RunStatus.OK or expr is None
    if expr is None:
        r2_test, simplicity, nodes = -math.inf, -math.inf, None
    else:
        nodes = simplified_node_count(expr)
        simplicity = simplicity_from_nodes(nodes)
        r2_test = -math.inf if failed else model_r2(expr, dataset)
    verdict: Optional[EquivalenceVerdict] = None
    if task is TaskKind.EXACT and dataset.ground_truth is not None:
        probe_domain = domain or (dataset.spec.domain if dataset.spec is not None else None)
        verdict = safe_verdict(dataset.ground_truth, None if failed else expr, probe_domain or [])
    scored = None if failed else expr
    return ScoreRecord(
        algorithm=algorithm,
        dataset=dataset.dataset_id,
        run=run,
        r2_test=r2_test,
        simplicity=simplicity,
        task_score=task_score(task, scored, dataset, verdict),
        exact=verdict,
        wall_seconds=wall_seconds,
        status=status,
        expression=None if expr is None else print_infix(expr),
        nodes_simplified=nodes,
    )


# --- record table ----------------------------------------------------------------------


def _index(
    records: Iterable[ScoreRecord], algorithms: Optional[Sequence[str]] = None
) -> Tuple[List[str], List[str], Dict[str, List[int]], Dict[Tuple[str, str, int], ScoreRecord]]:
    table: Dict[Tuple[str, str, int], ScoreRecord] = {}
    runs: Dict[str, set] = defaultdict(set)
    seen_algorithms = set()
    for rec in records:
        key = (rec.algorithm, rec.dataset, rec.run)
        if key in table:
            raise ConfigurationError(f"duplicate record for {rec.cell}")
        table[key] = rec
        runs[rec.dataset].add(rec.run)
        seen_algorithms.add(rec.algorithm)
    if not table:
        raise MissingRecords(["<no records>"])
    algos = list(algorithms) if algorithms is not None else sorted(seen_algorithms)
    datasets = sorted(runs)
    holes = [
        f"{a}/{d}/{r}"
        for d in datasets
        for r in sorted(runs[d])
        for a in algos
        if (a, d, r) not in table
    ]
    if holes:
        raise MissingRecords(holes)
    return algos, datasets, {d: sorted(runs[d]) for d in datasets}, table


def _criteria_for(recs: Sequence[ScoreRecord]) -> List[str]:
    names = ["r2_test", "simplicity"]
    if any(r.task_score is not None for r in recs):
        names.append("task_score")
    return names


def _value(rec: ScoreRecord, criterion: str) -> float:
    v = getattr(rec, criterion)
    return math.nan if v is None else float(v)


def _rank_block(values: Dict[str, np.ndarray], algos: Sequence[str]) -> Tuple[Dict[str, Dict[str, float]], Dict[str, float]]:
    """Rank every criterion across algorithms, then harmonic-mean each algorithm's ranks."""
    ranks: Dict[str, Dict[str, float]] = {}
    for name, column in values.items():
        ranked = rank_criterion(column, higher_better=True)
        ranks[name] = {a: float(r) for a, r in zip(algos, ranked)}
    aggregate = {a: harmonic_rank([ranks[name][a] for name in values]) for a in algos}
    return ranks, aggregate


def record_aggregates(
    records: Iterable[ScoreRecord], algorithms: Optional[Sequence[str]] = None
) -> Dict[Tuple[str, str, int], float]:
    """Harmonic aggregate of every single record, ranked against the other algorithms' same run."""
    algos, datasets, runs, table = _index(records, algorithms)
    out: Dict[Tuple[str, str, int], float] = {}
    for d in datasets:
        for r in runs[d]:
            recs = [table[(a, d, r)] for a in algos]
            crit = _criteria_for(recs)
            values = {c: np.asarray([_value(x, c) for x in recs]) for c in crit}
            _, agg = _rank_block(values, algos)
            for a in algos:
                out[(a, d, r)] = agg[a]
    return out


# --- track aggregation -----------------------------------------------------------------


def aggregate_track(
    records: Iterable[ScoreRecord],
    median_first: bool = True,
    alpha: float = 0.05,
    algorithms: Optional[Sequence[str]] = None,
    scope: str = "track",
) -> RankReport:
    """Rank all algorithms per dataset and summarise their harmonic aggregates.

    ``median_first`` takes each criterion's median over runs before ranking; otherwise every
    run is ranked and aggregated on its own and the per-dataset value is the median of those
    aggregates.
    """
    records = list(records)
    algos, datasets, runs, table = _index(records, algorithms)
    all_ranks: Dict[str, Dict[str, Dict[str, float]]] = {}
    aggregate: Dict[str, Dict[str, float]] = {}
    used_criteria: set = set()
    for d in datasets:
        per_algo = {a: [table[(a, d, r)] for r in runs[d]] for a in algos}
        crit = _criteria_for([rec for recs in per_algo.values() for rec in recs])
        used_criteria.update(crit)
        medians = {
            c: np.asarray([float(np.median([_value(rec, c) for rec in per_algo[a]])) for a in algos])
            for c in crit
        }
        ranks, agg = _rank_block(medians, algos)
        if not median_first:
            per_run = []
            for r in runs[d]:
                values = {c: np.asarray([_value(table[(a, d, r)], c) for a in algos]) for c in crit}
                per_run.append(_rank_block(values, algos)[1])
            agg = {a: float(np.median([block[a] for block in per_run])) for a in algos}
        all_ranks[d] = ranks
        aggregate[d] = agg

    summaries = []
    for a in algos:
        values = [aggregate[d][a] for d in datasets]
        summaries.append(
            AlgorithmSummary(
                algorithm=a,
                aggregates=values,
                median=float(np.median(values)),
                mean=float(np.mean(values)),
            )
        )
    winner = min(summaries, key=lambda s: (-s.median, -s.mean, s.algorithm)).algorithm

    report = RankReport(
        scope=scope,
        algorithms=algos,
        datasets=datasets,
        criteria=[c for c in CRITERIA if c in used_criteria],
        ranks=all_ranks,
        aggregate=aggregate,
        summaries=summaries,
        winner=winner,
        alpha=alpha,
        median_first=median_first,
    )
    _attach_statistics(report)
    logger.info("%s: %d algorithms x %d datasets, winner=%s", scope, len(algos), len(datasets), winner)
    return report


def _attach_statistics(report: RankReport) -> None:
    algos, datasets = report.algorithms, report.datasets
    matrix = np.asarray(
        [rank_criterion([report.aggregate[d][a] for a in algos]) for d in datasets], dtype=float
    )
    mean_ranks = matrix.mean(axis=0)
    for summary, mr in zip(report.summaries, mean_ranks):
        summary.mean_rank = float(mr)
    if len(algos) < 2 or len(datasets) < 2:
        return
    try:
        stats = friedman_nemenyi(matrix, report.alpha)
    except UnsupportedK as exc:
        logger.warning("skipping critical difference: %s", exc)
        return
    report.friedman_stat = stats.statistic
    report.friedman_p = stats.p_value
    report.critical_difference = stats.critical_difference
    report.groups = [[algos[i] for i in group] for group in stats.groups]


# --- level summaries -------------------------------------------------------------------


def level_of(dataset_id: str) -> str:
    """``ExactRediscovery-Easy-s3`` -> ``ExactRediscovery-Easy``."""
    head, sep, tail = dataset_id.rpartition("-s")
    return head if sep and tail.isdigit() else dataset_id


def recovery_rates(
    records: Iterable[ScoreRecord], level: Callable[[str], str] = level_of
) -> List[RecoveryRate]:
    """Any-run, best-run and per-run exact recovery per algorithm and level."""
    by_cell: Dict[Tuple[str, str], Dict[str, List[ScoreRecord]]] = defaultdict(lambda: defaultdict(list))
    for rec in records:
        if rec.exact is None:
            continue
        by_cell[(rec.algorithm, level(rec.dataset))][rec.dataset].append(rec)
    out = []
    for (algorithm, lvl), per_dataset in sorted(by_cell.items()):
        any_hits = best_hits = run_hits = total_runs = 0
        for recs in per_dataset.values():
            recs = sorted(recs, key=lambda r: r.run)
            hits = [r.exact.exact for r in recs]
            any_hits += any(hits)
            best = max(recs, key=lambda r: (r.r2_test, -r.run))
            best_hits += best.exact.exact
            run_hits += sum(hits)
            total_runs += len(recs)
        n = len(per_dataset)
        out.append(
            RecoveryRate(
                algorithm=algorithm,
                level=lvl,
                datasets=n,
                runs=total_runs,
                any_run=any_hits / n,
                best_run=best_hits / n,
                per_run=run_hits / total_runs,
            )
        )
    return out


def showcase(
    records: Iterable[ScoreRecord],
    algorithms: Optional[Sequence[str]] = None,
    level: Callable[[str], str] = level_of,
) -> List[Showcase]:
    """Per level, the returned model with the highest harmonic aggregate."""
    records = list(records)
    aggregates = record_aggregates(records, algorithms)
    lookup = {(r.algorithm, r.dataset, r.run): r for r in records}
    best: Dict[str, Tuple[tuple, Tuple[str, str, int]]] = {}
    for key, agg in aggregates.items():
        # highest aggregate, then R², then the earliest (algorithm, dataset, run)
        sort_key = (-agg, -lookup[key].r2_test, key)
        lvl = level(key[1])
        if lvl not in best or sort_key < best[lvl][0]:
            best[lvl] = (sort_key, key)
    return [
        Showcase(
            level=lvl,
            algorithm=key[0],
            dataset=key[1],
            run=key[2],
            aggregate=aggregates[key],
            record=lookup[key],
        )
        for lvl, (_, key) in sorted(best.items())
    ]


__all__ = [
    "CRITERIA",
    "aggregate_track",
    "harmonic_rank",
    "level_of",
    "rank_criterion",
    "record_aggregates",
    "recovery_rates",
    "score_record",
    "showcase",
]
