from __future__ import annotations

"""Utility helpers for constructing track pipeline instances."""

import datetime as _dt
import uuid
from typing import Optional

from export.track_writer import FileReportWriter
from models.configs import TrackConfig

from .track_pipeline import PipelineDependencies, RatingProvider, ReportWriter, TrackPipeline


def generate_run_id(prefix: str = "track") -> str:
    timestamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S")
    short_uuid = uuid.uuid4().hex[:8]
    return f"{prefix}-{timestamp}-{short_uuid}"


def build_pipeline(
    config: TrackConfig,
    rating_provider: Optional[RatingProvider] = None,
    writer: Optional[ReportWriter] = None,
    run_id: Optional[str] = None,
) -> TrackPipeline:
    """Construct a TrackPipeline; the run id only labels logs, never report contents."""
    writer = writer or FileReportWriter()
    deps = PipelineDependencies(rating_provider=rating_provider, writer=writer)
    return TrackPipeline(run_id=run_id or generate_run_id(config.track.value), config=config, deps=deps)


__all__ = ["build_pipeline", "generate_run_id"]
