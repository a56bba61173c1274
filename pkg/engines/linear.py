"""Ordinary least squares baseline used by the qualification gate."""

from __future__ import annotations

import logging
import warnings
from typing import Optional, Tuple

import numpy as np

from errors import ConfigurationError, RankDeficient
from expr.nodes import Binary, BinaryOp, Constant, Expr, Variable
from models.dataset import Dataset

logger = logging.getLogger(__name__)

RIDGE_LAMBDA = 1e-8


def linear_coefficients(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Intercept-first coefficients via QR; falls back to ridge when the design is rank deficient."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    n, d = X.shape
    if n < d + 1:
        raise ConfigurationError(f"linear fit needs at least {d + 1} rows, got {n}")
    A = np.column_stack([np.ones(n), X])
    Q, R = np.linalg.qr(A)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    if diag.size and diag.min() > tol:
        return np.linalg.solve(R, Q.T @ y), False
    logger.warning("design matrix is rank deficient; using ridge lambda=%g", RIDGE_LAMBDA)
    warnings.warn(RankDeficient("rank-deficient design, ridge fallback used"), stacklevel=2)
    gram = A.T @ A + RIDGE_LAMBDA * np.eye(d + 1)
    return np.linalg.solve(gram, A.T @ y), True


def affine_expr(coefs: np.ndarray) -> Expr:
    """c0 + c1*x0 + ...; negative slopes are written as subtractions."""
    out: Expr = Constant(float(coefs[0]))
    for i, c in enumerate(coefs[1:]):
        c = float(c)
        term = Binary(BinaryOp.MUL, Constant(abs(c)), Variable(i))
        out = Binary(BinaryOp.SUB if c < 0 else BinaryOp.ADD, out, term)
    return out


def fit_linear(ds: Dataset, y: Optional[np.ndarray] = None) -> Expr:
    """Least-squares affine model of ``ds`` (or of a raw matrix plus ``y``)."""
    if isinstance(ds, Dataset):
        X, target = ds.features, ds.target
    else:
        X, target = np.asarray(ds, dtype=float), y
    coefs, _ = linear_coefficients(X, target)
    return affine_expr(coefs)


__all__ = ["RIDGE_LAMBDA", "affine_expr", "fit_linear", "linear_coefficients"]
