"""Deterministic JSON for reports: sorted keys, no wall-clock fields, non-finite floats as strings."""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np
from pydantic import BaseModel

# Timing varies between identical reruns; it goes to timings.csv instead.
VOLATILE_KEYS = frozenset({"wall_seconds", "over_budget"})


def _float(value: float) -> Union[float, str]:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def sanitize(obj: Any, drop: Iterable[str] = VOLATILE_KEYS) -> Any:
    """Plain JSON-safe structure; pydantic models and numpy scalars are unwrapped."""
    drop = frozenset(drop)
    if isinstance(obj, BaseModel):
        return sanitize(obj.model_dump(), drop)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): sanitize(v, drop) for k, v in obj.items() if k not in drop}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [sanitize(v, drop) for v in items]
    if isinstance(obj, np.ndarray):
        return [sanitize(v, drop) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def dumps(obj: Any, drop: Iterable[str] = VOLATILE_KEYS) -> str:
    return json.dumps(sanitize(obj, drop), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(obj: Any, path: Union[str, Path], drop: Iterable[str] = VOLATILE_KEYS) -> str:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(obj, drop), encoding="utf-8")
    return str(out)


__all__ = ["VOLATILE_KEYS", "dumps", "sanitize", "write_json"]
