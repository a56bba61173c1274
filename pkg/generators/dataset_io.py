"""PMLB-style dataset files: tab-separated, header row, final ``target`` column.

Metadata (task recipe, ground truth, relevant/irrelevant columns) lives in a JSON sidecar
next to the table: ``<base>.meta.json`` where ``<base>`` drops ``.tsv`` / ``.gz``.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from errors import DatasetIoError, ParseError, SchemaError
from expr.parser import parse, print_infix
from models.dataset import TARGET_NAME, Dataset
from models.tasks import TaskSpec

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"


def sidecar_path(path: PathLike) -> Path:
    p = Path(path)
    name = p.name
    for suffix in (".gz", ".tsv", ".txt"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return p.with_name(name + ".meta.json")


def _compression(path: Path) -> Union[str, Dict[str, Any], None]:
    # Fixed gzip mtime keeps identical datasets byte-identical on disk.
    if path.name.endswith(".gz"):
        return {"method": "gzip", "mtime": 0}
    return None


def _metadata(ds: Dataset) -> Dict[str, Any]:
    spec = ds.spec
    return {
        "task": spec.task.value if spec else None,
        "difficulty": spec.difficulty.value if spec else None,
        "seed": spec.seed if spec else None,
        "noise_ratio": spec.noise_ratio if spec else None,
        "ground_truth": print_infix(ds.ground_truth) if ds.ground_truth is not None else None,
        "relevant_vars": sorted(ds.relevant_vars),
        "irrelevant_vars": sorted(ds.irrelevant_vars),
        "split": ds.split,
        "name": ds.name,
        "spec": spec.model_dump(mode="json") if spec else None,
    }


def write_dataset(ds: Dataset, path: PathLike) -> Path:
    """Write the table and its sidecar; returns the table path."""
    out = Path(path)
    frame = pd.DataFrame(ds.features, columns=list(ds.feature_names))
    frame[TARGET_NAME] = ds.target
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(
            out,
            sep="\t",
            index=False,
            float_format=FLOAT_FORMAT,
            compression=_compression(out),
            lineterminator="\n",
        )
        sidecar_path(out).write_text(
            json.dumps(_metadata(ds), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise DatasetIoError(f"could not write dataset to {out}: {exc}") from exc
    logger.info("wrote %s (%d rows, %d features)", out, ds.n_samples, ds.n_features)
    return out


def _read_sidecar(path: Path) -> Optional[Dict[str, Any]]:
    meta = sidecar_path(path)
    if not meta.exists():
        return None
    try:
        return json.loads(meta.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetIoError(f"unreadable sidecar {meta}: {exc}") from exc


def read_dataset(path: PathLike) -> Dataset:
    src = Path(path)
    if not src.exists():
        raise DatasetIoError(f"dataset not found: {src}")
    try:
        frame = pd.read_csv(src, sep="\t", compression="infer", float_precision="round_trip")
    except pd.errors.EmptyDataError as exc:
        raise SchemaError(f"{src} is empty") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetIoError(f"could not read {src}: {exc}") from exc
    if TARGET_NAME not in frame.columns:
        raise SchemaError(f"{src} has no '{TARGET_NAME}' column")
    feature_names = [str(c) for c in frame.columns if c != TARGET_NAME]
    try:
        features = frame[feature_names].to_numpy(dtype=float)
        target = frame[TARGET_NAME].to_numpy(dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{src} contains non-numeric values") from exc

    meta = _read_sidecar(src) or {}
    ground_truth = None
    if meta.get("ground_truth"):
        try:
            ground_truth = parse(meta["ground_truth"])
        except ParseError as exc:
            raise SchemaError(f"sidecar ground truth does not parse: {exc}") from exc
    spec = TaskSpec.model_validate(meta["spec"]) if meta.get("spec") else None
    return Dataset(
        features=np.asarray(features, dtype=float),
        target=target,
        feature_names=feature_names,
        ground_truth=ground_truth,
        relevant_vars=frozenset(meta.get("relevant_vars", ())),
        irrelevant_vars=frozenset(meta.get("irrelevant_vars", ())),
        spec=spec,
        split=meta.get("split", "train"),
        name=meta.get("name") or src.name.split(".")[0],
    )


__all__ = ["read_dataset", "sidecar_path", "write_dataset"]
