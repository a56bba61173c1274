"""Wall-clock budgets for single runs."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable, Generic, TypeVar

from errors import BudgetExceeded, ConfigurationError
from models.configs import BudgetPolicy

logger = logging.getLogger(__name__)

T = TypeVar("T")

GRACE = 0.10
FULL_SMALL_SAMPLES = 1000
FULL_SMALL_BUDGET = 3600.0
FULL_LARGE_BUDGET = 36000.0


@dataclass(slots=True)
class Timed(Generic[T]):
    value: T
    wall_seconds: float
    # finished, but only inside the grace period
    over_budget: bool = False


def budget_for(policy: BudgetPolicy, n_samples: int, desk_budget: float) -> float:
    """Per-run budget: the desk default, or 1 h / 10 h by dataset size class."""
    if BudgetPolicy(policy) is BudgetPolicy.DESK:
        return float(desk_budget)
    return FULL_SMALL_BUDGET if n_samples <= FULL_SMALL_SAMPLES else FULL_LARGE_BUDGET


def enforce_budget(fn: Callable[[], T], budget_seconds: float, grace: float = GRACE) -> Timed[T]:
    """Run ``fn`` on a worker thread and stop waiting after ``budget * (1 + grace)`` seconds.

    The engine is expected to honour the budget itself; a run that does not is abandoned
    (the daemon thread is left to finish on its own) and reported as BudgetExceeded.
    Exceptions raised by ``fn`` propagate unchanged.
    """
    if not budget_seconds or budget_seconds <= 0:
        raise ConfigurationError(f"budget must be > 0, got {budget_seconds}")
    outcome: dict = {}

    def target() -> None:
        try:
            outcome["value"] = fn()
        except BaseException as exc:  # re-raised on the caller's thread
            outcome["error"] = exc

    limit = budget_seconds * (1.0 + grace)
    started = time.monotonic()
    worker = threading.Thread(target=target, name="srcomp-run", daemon=True)
    worker.start()
    worker.join(limit)
    wall = time.monotonic() - started
    if worker.is_alive():
        logger.warning("run hard-stopped after %.2fs (budget %.2fs)", wall, budget_seconds)
        raise BudgetExceeded(wall, budget_seconds)
    if "error" in outcome:
        raise outcome["error"]
    over = wall > budget_seconds
    if over:
        logger.warning("run finished inside the grace period: %.2fs > %.2fs", wall, budget_seconds)
    return Timed(value=outcome.get("value"), wall_seconds=wall, over_budget=over)


__all__ = ["GRACE", "Timed", "budget_for", "enforce_budget"]
