"""Expert trust ratings and the real-world final score."""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from errors import DatasetIoError, MissingTrust, SchemaError
from eval.rubric import harmonic_rank, rank_criterion
from models.records import RealworldEntry, RealworldScore, TrustRating

logger = logging.getLogger(__name__)

RATING_COLUMNS = ("model_id", "rating", "rater", "timestamp")

PathLike = Union[str, Path]


def read_ratings(path: PathLike) -> List[TrustRating]:
    src = Path(path)
    if not src.exists():
        raise DatasetIoError(f"ratings file not found: {src}")
    try:
        frame = pd.read_csv(src, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{src} is empty") from exc
    missing = [c for c in ("model_id", "rating") if c not in frame.columns]
    if missing:
        raise SchemaError(f"{src} lacks columns {missing}")
    out: List[TrustRating] = []
    for i, row in enumerate(frame.to_dict("records"), start=2):
        try:
            out.append(
                TrustRating(
                    model_id=row["model_id"].strip(),
                    rating=int(row["rating"]),
                    rater=(row.get("rater") or "expert").strip(),
                    timestamp=(row.get("timestamp") or "").strip(),
                )
            )
        except (ValueError, ValidationError) as exc:
            raise SchemaError(f"{src} line {i}: {exc}") from exc
    return out


def write_ratings(ratings: Iterable[TrustRating], path: PathLike) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = [r.model_dump() for r in ratings]
    pd.DataFrame(rows, columns=list(RATING_COLUMNS)).to_csv(out, index=False, lineterminator="\n")
    return out


def mean_trust(ratings: Iterable[TrustRating]) -> Dict[str, float]:
    """Average rating per model across raters."""
    by_model: Dict[str, List[int]] = {}
    for r in ratings:
        by_model.setdefault(r.model_id, []).append(r.rating)
    return {k: float(np.mean(v)) for k, v in sorted(by_model.items())}


def _raw_harmonic(values: Sequence[float]) -> float:
    if any(not (v > 0) or not math.isfinite(v) for v in values):
        return math.nan
    return len(values) / sum(1.0 / v for v in values)


def realworld_score(
    entries: Sequence[RealworldEntry], trust: Optional[Mapping[str, float]] = None
) -> List[RealworldScore]:
    """Harmonic mean of the per-criterion ranks (R², simplicity, trust), higher is better."""
    trust = dict(trust or {})
    resolved: List[Tuple[RealworldEntry, float]] = []
    unrated = []
    for e in entries:
        t = e.trust if e.trust is not None else trust.get(e.model_id)
        if t is None:
            unrated.append(e.model_id)
        else:
            resolved.append((e, float(t)))
    if unrated:
        raise MissingTrust(unrated)
    if not resolved:
        return []
    r2_ranks = rank_criterion([e.r2_test for e, _ in resolved])
    simp_ranks = rank_criterion([e.simplicity for e, _ in resolved])
    trust_ranks = rank_criterion([t for _, t in resolved])
    out = []
    for (e, t), rr, rs, rt in zip(resolved, r2_ranks, simp_ranks, trust_ranks):
        out.append(
            RealworldScore(
                algorithm=e.algorithm,
                model_id=e.model_id,
                r2_test=e.r2_test,
                simplicity=e.simplicity,
                trust=t,
                rank_r2=float(rr),
                rank_simplicity=float(rs),
                rank_trust=float(rt),
                score=harmonic_rank([rr, rs, rt]),
                raw_harmonic=_raw_harmonic([e.r2_test, e.simplicity, t]),
            )
        )
    return sorted(out, key=lambda s: (-s.score, s.algorithm))


def write_screen(
    out_dir: PathLike,
    entry: RealworldEntry,
    target: str,
    expression: str,
    dates: Sequence,
    truth: Sequence[float],
    prediction: Sequence[float],
) -> Tuple[Path, Path]:
    """Prediction-vs-truth CSV and a Markdown card for one model awaiting a rating."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    csv_path = root / f"{entry.model_id}.csv"
    pd.DataFrame(
        {"date": pd.DatetimeIndex(dates).strftime("%Y-%m-%d"), "truth": truth, "prediction": prediction}
    ).to_csv(csv_path, index=False, float_format="%.6g", lineterminator="\n")
    card = [
        f"# Model {entry.model_id}",
        "",
        f"**Target:** {target} (next day)",
        f"**Algorithm:** {entry.algorithm}",
        f"**Test R²:** {entry.r2_test:.4f}",
        f"**Simplicity:** {entry.simplicity:.1f}",
        "",
        "```",
        expression,
        "```",
        "",
        f"Prediction vs truth: `{csv_path.name}`",
        "",
        "Rate: *I trust this model* from 1 (strong distrust) to 5 (strong trust).",
        "",
    ]
    md_path = root / f"{entry.model_id}.md"
    md_path.write_text("\n".join(card), encoding="utf-8")
    return csv_path, md_path


__all__ = ["mean_trust", "read_ratings", "realworld_score", "write_ratings", "write_screen"]
