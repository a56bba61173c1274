"""Error function used by the raw evaluator and the search-time primitive set.

``erf`` combines a positive-term Maclaurin series (|x| < 3) with a continued fraction for
erfc (|x| >= 3); both branches stay within 1e-7 absolute of the exact value and neither
suffers cancellation. ``erf_rational`` is the five-term rational form (max error 1.5e-7),
cheap enough for fitness evaluation during search.
"""

from __future__ import annotations

import math

import numpy as np

_SERIES_CUTOFF = 3.0
_SERIES_MAX_TERMS = 200
_CF_TERMS = 80
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

# Five-term rational approximation coefficients.
_P = 0.3275911
_A = (0.254829592, -0.284496736, 1.421413741, -1.453152027, 1.061405429)


def _erf_series(x: np.ndarray) -> np.ndarray:
    # erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))
    term = x.copy()
    total = x.copy()
    x2 = 2.0 * x * x
    for n in range(1, _SERIES_MAX_TERMS):
        term = term * x2 / (2 * n + 1)
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return _TWO_OVER_SQRT_PI * np.exp(-x * x) * total


def _erfc_continued_fraction(ax: np.ndarray) -> np.ndarray:
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0
    t = ax.copy()
    for k in range(_CF_TERMS, 0, -1):
        t = ax + (0.5 * k) / t
    return np.exp(-ax * ax) / (math.sqrt(math.pi) * t)


def erf(x):
    """Vectorised error function; scalars in, scalar out."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.full(arr.shape, np.nan)
    ax = np.abs(arr)
    small = ax < _SERIES_CUTOFF
    large = (ax >= _SERIES_CUTOFF) & np.isfinite(arr)
    if np.any(small):
        out[small] = _erf_series(arr[small])
    if np.any(large):
        out[large] = np.sign(arr[large]) * (1.0 - _erfc_continued_fraction(ax[large]))
    inf = np.isinf(arr)
    out[inf] = np.sign(arr[inf])
    return float(out[0]) if scalar else out


def erf_rational(x):
    """Five-term rational approximation, |error| <= 1.5e-7."""
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    t = 1.0 / (1.0 + _P * ax)
    poly = t * (_A[0] + t * (_A[1] + t * (_A[2] + t * (_A[3] + t * _A[4]))))
    with np.errstate(over="ignore", under="ignore"):
        y = 1.0 - poly * np.exp(-ax * ax)
    out = np.sign(arr) * y
    return float(out) if np.ndim(out) == 0 else out


__all__ = ["erf", "erf_rational"]
