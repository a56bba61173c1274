from __future__ import annotations

import math
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

from models.records import QualificationResult, RankReport, RealworldScore, RecoveryRate, Showcase

if TYPE_CHECKING:
    from pipelines.track_pipeline import TrackResult


def _num(value: Optional[float], fmt: str = ".3f") -> str:
    if value is None:
        return "-"
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return format(value, fmt)


def _code(text: Optional[str]) -> str:
    if not text:
        return "-"
    return "`" + text.replace("|", "\\|") + "`"


def rank_report_md(report: RankReport) -> List[str]:
    parts: List[str] = []
    parts.append(f"## Ranking: {report.scope}")
    parts.append("")
    parts.append(
        f"{len(report.algorithms)} algorithms, {len(report.datasets)} datasets, "
        f"criteria: {', '.join(report.criteria)}"
    )
    parts.append("")
    parts.append("| Algorithm | Median aggregate | Mean aggregate | Mean rank |")
    parts.append("| --- | --- | --- | --- |")
    for s in sorted(report.summaries, key=lambda s: (-s.median, -s.mean, s.algorithm)):
        mark = " **(winner)**" if s.algorithm == report.winner else ""
        parts.append(f"| {s.algorithm}{mark} | {_num(s.median)} | {_num(s.mean)} | {_num(s.mean_rank, '.2f')} |")
    parts.append("")
    if report.critical_difference is not None:
        parts.append(
            f"Friedman chi² = {_num(report.friedman_stat)} (p = {_num(report.friedman_p, '.3g')}); "
            f"Nemenyi CD at alpha {report.alpha} = {_num(report.critical_difference)}"
        )
        parts.append("")
        parts.append("**Groups without significant difference:**")
        for g in report.groups:
            parts.append(f"- {', '.join(g)}")
        parts.append("")
    return parts


def qualification_md(result: QualificationResult) -> List[str]:
    parts = ["## Qualification", ""]
    algorithms = sorted(result.median_rank, key=lambda a: (-result.median_rank[a], a))
    parts.append("| Algorithm | Median rank | Status |")
    parts.append("| --- | --- | --- |")
    for a in algorithms:
        status = "disqualified" if a in result.disqualified else ("baseline" if a == result.baseline else "qualified")
        parts.append(f"| {a} | {_num(result.median_rank[a], '.2f')} | {status} |")
    parts.append("")
    return parts


def recovery_md(rates: Sequence[RecoveryRate]) -> List[str]:
    parts = ["## Exact rediscovery", ""]
    parts.append("| Algorithm | Level | Datasets | Any run | Best run | Per run |")
    parts.append("| --- | --- | --- | --- | --- | --- |")
    for r in rates:
        parts.append(
            f"| {r.algorithm} | {r.level} | {r.datasets} | {_num(r.any_run, '.0%')} "
            f"| {_num(r.best_run, '.0%')} | {_num(r.per_run, '.0%')} |"
        )
    parts.append("")
    return parts


def showcase_md(items: Sequence[Showcase]) -> List[str]:
    parts = ["## Best model per level", ""]
    parts.append("| Level | Algorithm | Run | Aggregate | R² | Simplicity | Task score | Model |")
    parts.append("| --- | --- | --- | --- | --- | --- | --- | --- |")
    for s in items:
        rec = s.record
        parts.append(
            f"| {s.level} | {s.algorithm} | {s.run} | {_num(s.aggregate)} | {_num(rec.r2_test, '.4f')} "
            f"| {_num(rec.simplicity, '.1f')} | {_num(rec.task_score)} | {_code(rec.expression)} |"
        )
    parts.append("")
    return parts


def realworld_md(final: Dict[str, List[RealworldScore]]) -> List[str]:
    parts = ["## Real-world results", ""]
    for target, scores in final.items():
        parts.append(f"### {target}")
        parts.append("")
        parts.append("| Algorithm | Score | R² | Simplicity | Trust | Raw harmonic |")
        parts.append("| --- | --- | --- | --- | --- | --- |")
        for s in scores:
            parts.append(
                f"| {s.algorithm} | {_num(s.score)} | {_num(s.r2_test, '.4f')} | {_num(s.simplicity, '.1f')} "
                f"| {_num(s.trust, '.2f')} | {_num(s.raw_harmonic)} |"
            )
        parts.append("")
    return parts


def write_track_md(result: "TrackResult", output_path: str) -> str:
    parts: List[str] = []
    parts.append(f"# Track report: {result.config.track.value}")
    parts.append("")
    parts.append("**Assumptions**:")
    for a in result.assumptions:
        parts.append(f"- {a}")
    parts.append("")
    if result.qualification is not None:
        parts.extend(qualification_md(result.qualification))
    for report in result.reports.values():
        parts.extend(rank_report_md(report))
    if result.recovery:
        parts.extend(recovery_md(result.recovery))
    if result.showcase:
        parts.extend(showcase_md(result.showcase))
    if result.realworld:
        parts.extend(realworld_md(result.realworld))

    out = Path(output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(parts), encoding="utf-8")
    return str(out)


def write_rank_md(report: RankReport, output_path: str) -> str:
    out = Path(output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(["# Rank report", ""] + rank_report_md(report)), encoding="utf-8")
    return str(out)


__all__ = ["rank_report_md", "write_rank_md", "write_track_md"]
