"""Pipeline entry points for the competition tracks."""

from .budget import Timed, budget_for, enforce_budget
from .track_pipeline import (
    PipelineDependencies,
    RatingProvider,
    ReportWriter,
    RunJob,
    RunOutcome,
    TrackPipeline,
    TrackResult,
    execute_run,
    run_qualification,
    run_realworld,
    run_synthetic,
)

__all__ = [
    "PipelineDependencies",
    "RatingProvider",
    "ReportWriter",
    "RunJob",
    "RunOutcome",
    "Timed",
    "TrackPipeline",
    "TrackResult",
    "budget_for",
    "enforce_budget",
    "execute_run",
    "run_qualification",
    "run_realworld",
    "run_synthetic",
]
