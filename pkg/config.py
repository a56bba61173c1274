"""Centralized configuration loader.

Loads harness settings (output location, worker count, default budgets, log level)
from the environment. Other modules should import from here instead of reading
os.environ directly.
"""

from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

try:
    from dotenv import load_dotenv
except Exception:  # tolerate missing python-dotenv
    def load_dotenv(*args, **kwargs):  # type: ignore
        return False


def _load_env_once() -> None:
    """Idempotently load .env so downstream imports see variables."""
    # Repo-local .env does not override variables already exported by the shell
    load_dotenv(override=False)


_load_env_once()

LOG_FORMAT = "[%(name)s] %(message)s"


@dataclass(frozen=True)
class HarnessSettings:
    output_dir: Path
    workers: int
    log_level: str
    synthetic_budget_seconds: float
    qualification_budget_seconds: float
    run_slow: bool = False


def _get(key: str, default: Optional[str] = None) -> Optional[str]:
    val = os.getenv(key, default if default is not None else None)
    if val is None:
        return None
    s = str(val).strip()
    return s if s else (default if default is not None else "")


def _get_int(key: str, default: int) -> int:
    raw = _get(key, None)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _get_float(key: str, default: float) -> float:
    raw = _get(key, None)
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def load_settings() -> HarnessSettings:
    """Read harness settings, falling back to desk-scale defaults."""
    return HarnessSettings(
        output_dir=Path(_get("SRCOMP_OUTPUT_DIR", "outputs") or "outputs"),
        workers=max(1, _get_int("SRCOMP_WORKERS", 1)),
        log_level=(_get("SRCOMP_LOG_LEVEL", "INFO") or "INFO").upper(),
        synthetic_budget_seconds=_get_float("SRCOMP_SYNTHETIC_BUDGET", 60.0),
        qualification_budget_seconds=_get_float("SRCOMP_QUALIFICATION_BUDGET", 120.0),
        run_slow=(_get("SRCOMP_RUN_SLOW", "") or "").lower() in {"1", "true", "yes"},
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stream handler on the root logger using the bracketed prefix format."""
    root = logging.getLogger()
    lvl = (level or load_settings().log_level).upper()
    root.setLevel(getattr(logging, lvl, logging.INFO))
    if any(getattr(h, "_srcomp", False) for h in root.handlers):
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._srcomp = True  # type: ignore[attr-defined]
    root.addHandler(handler)


def log_active_config(prefix: str = "[config]") -> None:
    """Print a concise summary of active settings at startup."""
    cfg = load_settings()
    print(
        f"{prefix} output_dir='{cfg.output_dir}' workers={cfg.workers} log_level={cfg.log_level} "
        f"synthetic_budget={cfg.synthetic_budget_seconds:g}s "
        f"qualification_budget={cfg.qualification_budget_seconds:g}s",
        file=sys.stderr,
    )
