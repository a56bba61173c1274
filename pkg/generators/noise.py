from __future__ import annotations

import math

import numpy as np

from errors import InvalidRatio
from expr.random_tree import RngLike, as_generator


def noise_scale(sigma: float, ratio: float) -> float:
    """Standard deviation of the injected noise: sigma * sqrt(ratio / (1 - ratio))."""
    if not 0.0 <= ratio < 1.0:
        raise InvalidRatio(f"noise ratio must lie in [0, 1), got {ratio}")
    return sigma * math.sqrt(ratio / (1.0 - ratio))


def add_noise(y: np.ndarray, ratio: float, rng: RngLike) -> np.ndarray:
    """Perturb ``y`` with i.i.d. Gaussian noise scaled by its own sample standard deviation."""
    if not 0.0 <= ratio < 1.0:
        raise InvalidRatio(f"noise ratio must lie in [0, 1), got {ratio}")
    values = np.asarray(y, dtype=float)
    if values.size < 2:
        raise ValueError("add_noise needs at least two values to estimate sigma")
    if ratio == 0.0:
        return values.copy()
    sigma = float(np.std(values, ddof=1))
    z = as_generator(rng).standard_normal(values.shape)
    return values + noise_scale(sigma, ratio) * z


__all__ = ["add_noise", "noise_scale"]
