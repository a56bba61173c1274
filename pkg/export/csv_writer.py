from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd

from models.records import ModelRecord, RankReport, RealworldScore, ScoreRecord

PathLike = Union[str, Path]

SCORE_COLUMNS = [
    "algorithm", "dataset", "run", "status", "r2_test", "simplicity", "task_score",
    "exact", "exact_constant", "nodes_simplified", "expression",
]


def _write(frame: pd.DataFrame, path: PathLike) -> str:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.10g", lineterminator="\n")
    return str(out)


def write_scores_csv(records: Iterable[ScoreRecord], path: PathLike) -> str:
    """One row per (algorithm, dataset, run); wall times live in timings.csv."""
    rows = []
    for r in records:
        rows.append(
            {
                "algorithm": r.algorithm,
                "dataset": r.dataset,
                "run": r.run,
                "status": r.status.value,
                "r2_test": r.r2_test,
                "simplicity": r.simplicity,
                "task_score": r.task_score,
                "exact": None if r.exact is None else r.exact.kind.value,
                "exact_constant": None if r.exact is None else r.exact.constant,
                "nodes_simplified": r.nodes_simplified,
                "expression": r.expression,
            }
        )
    return _write(pd.DataFrame(rows, columns=SCORE_COLUMNS), path)


def write_timings_csv(models: Iterable[ModelRecord], path: PathLike) -> str:
    """Per-algorithm wall time: run count, median and max seconds, grace-period finishes, overruns."""
    frame = pd.DataFrame(
        [
            {
                "algorithm": m.algorithm,
                "wall_seconds": m.wall_seconds,
                "grace": m.over_budget,
                "over": m.status.value == "budget_exceeded",
            }
            for m in models
        ],
        columns=["algorithm", "wall_seconds", "grace", "over"],
    )
    summary = (
        frame.groupby("algorithm", sort=True)
        .agg(runs=("wall_seconds", "size"), median_seconds=("wall_seconds", "median"),
             max_seconds=("wall_seconds", "max"), in_grace=("grace", "sum"),
             budget_exceeded=("over", "sum"))
        .reset_index()
    )
    return _write(summary, path)


def write_cd_csv(report: RankReport, path: PathLike) -> str:
    """Mean rank per algorithm plus CD and group membership, for external diagram tools."""
    rows: List[dict] = []
    for s in report.summaries:
        member_of = [str(i) for i, g in enumerate(report.groups) if s.algorithm in g]
        rows.append(
            {
                "algorithm": s.algorithm,
                "mean_rank": s.mean_rank,
                "median_aggregate": s.median,
                "critical_difference": report.critical_difference,
                "alpha": report.alpha,
                "n_datasets": len(report.datasets),
                "groups": ";".join(member_of),
            }
        )
    return _write(pd.DataFrame(rows), path)


def write_realworld_csv(scores: Iterable[RealworldScore], path: PathLike, target: str = "") -> str:
    rows = [{"target": target, **s.model_dump()} for s in scores]
    return _write(pd.DataFrame(rows), path)


__all__ = ["write_cd_csv", "write_realworld_csv", "write_scores_csv", "write_timings_csv"]
