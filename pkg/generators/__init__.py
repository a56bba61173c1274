"""Synthetic competition tasks, noise injection and PMLB-style dataset files."""

from generators.dataset_io import read_dataset, write_dataset
from generators.noise import add_noise
from generators.tasks import (
    gen_exact,
    gen_extrapolation,
    gen_feature_selection,
    gen_local_optima,
    gen_noise_task,
    generate,
)

__all__ = [
    "add_noise",
    "gen_exact",
    "gen_extrapolation",
    "gen_feature_selection",
    "gen_local_optima",
    "gen_noise_task",
    "generate",
    "read_dataset",
    "write_dataset",
]
