"""Levenberg-Marquardt tuning of the constants inside an expression."""

from __future__ import annotations

import logging
import time
from typing import Optional, Sequence

import numpy as np

from expr.evaluate import RAW_KERNELS, OpTable, evaluate_batch
from expr.nodes import Expr, constants, with_constants
from models.dataset import Dataset

logger = logging.getLogger(__name__)

STEP_SCALE = 1e-6
_LAMBDA0 = 1e-3
_LAMBDA_MAX = 1e12


def _residuals(expr: Expr, theta: np.ndarray, X: np.ndarray, y: np.ndarray, table: OpTable) -> np.ndarray:
    return evaluate_batch(with_constants(expr, theta), X, table).values - y


def _sse(r: np.ndarray) -> float:
    if not np.all(np.isfinite(r)):
        return float("inf")
    return float(r @ r)


def jacobian(
    expr: Expr,
    X: np.ndarray,
    theta: Sequence[float],
    table: OpTable = RAW_KERNELS,
    step_scale: float = STEP_SCALE,
) -> np.ndarray:
    """Central-difference Jacobian of the model output w.r.t. its constants (preorder)."""
    base = np.asarray(theta, dtype=float)
    J = np.empty((X.shape[0], base.size))
    for j in range(base.size):
        h = step_scale * (1.0 + abs(base[j]))
        up, down = base.copy(), base.copy()
        up[j] += h
        down[j] -= h
        f_up = evaluate_batch(with_constants(expr, up), X, table).values
        f_down = evaluate_batch(with_constants(expr, down), X, table).values
        J[:, j] = (f_up - f_down) / (2.0 * h)
    return J


def levenberg_marquardt(
    expr: Expr,
    X: np.ndarray,
    y: np.ndarray,
    iters: int = 50,
    table: OpTable = RAW_KERNELS,
    deadline: Optional[float] = None,
) -> Expr:
    theta = np.asarray(constants(expr), dtype=float)
    if theta.size == 0:
        return expr
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    r = _residuals(expr, theta, X, y, table)
    best = _sse(r)
    if not np.isfinite(best):
        return expr
    lam = _LAMBDA0
    for _ in range(iters):
        if deadline is not None and time.monotonic() >= deadline:
            break
        J = jacobian(expr, X, theta, table)
        if not np.all(np.isfinite(J)):
            break
        g = J.T @ r
        H = J.T @ J
        accepted = False
        while lam <= _LAMBDA_MAX:
            A = H + lam * (np.diag(np.diag(H)) + np.eye(theta.size) * 1e-12)
            try:
                delta = np.linalg.solve(A, -g)
            except np.linalg.LinAlgError:
                delta = np.linalg.lstsq(A, -g, rcond=None)[0]
            trial = theta + delta
            if np.all(np.isfinite(trial)):
                r_trial = _residuals(expr, trial, X, y, table)
                sse_trial = _sse(r_trial)
                if sse_trial < best:
                    improvement = best - sse_trial
                    theta, r, best = trial, r_trial, sse_trial
                    lam = max(lam * 0.3, 1e-12)
                    accepted = True
                    break
            lam *= 10.0
        if not accepted or improvement <= 1e-15 * (1.0 + best):
            break
    return with_constants(expr, theta.tolist())


def optimize_constants(
    expr: Expr,
    ds: Dataset,
    iters: int = 50,
    table: OpTable = RAW_KERNELS,
    deadline: Optional[float] = None,
) -> Expr:
    """Tune constants to minimise SSE on ``ds``; never returns a worse fit than the input."""
    return levenberg_marquardt(expr, ds.features, ds.target, iters=iters, table=table, deadline=deadline)


__all__ = ["STEP_SCALE", "jacobian", "levenberg_marquardt", "optimize_constants"]
