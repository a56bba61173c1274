from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Union

from errors import CompetitionError, ParseError, SchemaError
from eval.rubric import score_record
from expr.parser import parse
from models.dataset import Dataset
from models.records import ModelRecord, RunStatus, ScoreRecord

logger = logging.getLogger(__name__)

MODEL_SUFFIX = ".model.json"
SCORE_SUFFIX = ".score.json"

PathLike = Union[str, Path]


def load_model_record(path: PathLike) -> ModelRecord:
    try:
        return ModelRecord.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise CompetitionError(f"model file not found: {path}") from exc
    except ValueError as exc:
        raise SchemaError(f"{path}: not a model record ({exc})") from exc


def evaluate(model: ModelRecord, test: Dataset) -> ScoreRecord:
    """Score a fitted model record against a test split; unparseable models count as failed."""
    status = model.status
    expr = None
    if model.expression is not None:
        try:
            expr = parse(model.expression)
        except ParseError as exc:
            logger.warning("%s/%s run %d: unparseable model (%s)", model.algorithm, model.dataset, model.run, exc)
            status = RunStatus.FAILED
    task = test.spec.task if test.spec is not None else None
    return score_record(
        model.algorithm,
        test,
        model.run,
        expr,
        task=task,
        wall_seconds=model.wall_seconds,
        status=status,
    )


def collect_scores(runs_dir: PathLike) -> List[ScoreRecord]:
    """Every ``*.score.json`` under ``runs_dir``, in path order."""
    root = Path(runs_dir)
    if not root.is_dir():
        raise CompetitionError(f"runs directory not found: {root}")
    out: List[ScoreRecord] = []
    for path in sorted(root.rglob(f"*{SCORE_SUFFIX}")):
        try:
            out.append(ScoreRecord.model_validate_json(path.read_text(encoding="utf-8")))
        except ValueError as exc:
            raise SchemaError(f"{path}: not a score record ({exc})") from exc
    logger.info("collected %d score records from %s", len(out), root)
    return out


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:.4g}"


def write_report(records: List[ScoreRecord], out_path: PathLike, title: str = "Score Report") -> str:
    lines: List[str] = []
    lines.append(f"# {title}\n")
    failed = sum(1 for r in records if r.status is not RunStatus.OK)
    lines.append(f"Records: {len(records)} ({failed} failed)\n")
    lines.append("\n## Details\n")
    lines.append("| Algorithm | Dataset | Run | R² | Simplicity | Task score | Exact | Status | Model |\n")
    lines.append("| --- | --- | --- | --- | --- | --- | --- | --- | --- |\n")
    for r in records:
        exact = "-" if r.exact is None else r.exact.kind.value
        model = (r.expression or "").replace("|", "\\|")
        lines.append(
            f"| {r.algorithm} | {r.dataset} | {r.run} | {_fmt(r.r2_test)} | {_fmt(r.simplicity)} "
            f"| {_fmt(r.task_score)} | {exact} | {r.status.value} | `{model}` |\n"
        )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(lines), encoding="utf-8")
    logger.info("wrote report to %s", out)
    return str(out)


__all__ = ["MODEL_SUFFIX", "SCORE_SUFFIX", "collect_scores", "evaluate", "load_model_record", "write_report"]
