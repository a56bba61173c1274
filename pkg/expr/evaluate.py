"""Vectorised evaluation of expression trees.

Evaluation is driven by an operator table mapping each op to a kernel that returns
``(values, violated)``. The RAW table implements the true mathematical operators and flags
partial-operator hits (log/sqrt of negatives, |denominator| < 1e-12, non-real pow, zero to a
negative power). Those are counted as domain violations. A non-finite value reached from finite
operands is counted separately as an overflow. Search-time protections are a
different table supplied by the engine; scoring always evaluates with RAW.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Sequence, Tuple, Union

import numpy as np

from errors import DomainViolation, NumericOverflow
from expr.nodes import Binary, BinaryOp, Constant, Expr, Unary, UnaryOp, Variable, arity
from expr.special import erf

DIV_EPSILON = 1e-12

KernelResult = Tuple[np.ndarray, np.ndarray]
Kernel = Callable[..., KernelResult]
OpTable = Mapping[Union[UnaryOp, BinaryOp], Kernel]


def _ok(values: np.ndarray) -> KernelResult:
    return values, np.zeros(values.shape, dtype=bool)


def _raw_div(a: np.ndarray, b: np.ndarray) -> KernelResult:
    bad = np.abs(b) < DIV_EPSILON
    safe = np.where(bad, 1.0, b)
    out = np.where(bad, np.nan, a / safe)
    return out, bad


def _raw_log(a: np.ndarray) -> KernelResult:
    bad = ~(a > 0)
    out = np.log(np.where(bad, 1.0, a))
    out[bad] = np.nan
    return out, bad


def _raw_sqrt(a: np.ndarray) -> KernelResult:
    bad = ~(a >= 0)
    out = np.sqrt(np.where(bad, 0.0, a))
    out[bad] = np.nan
    return out, bad


def _raw_pow(a: np.ndarray, b: np.ndarray) -> KernelResult:
    out = np.power(a, b)
    bad = np.isnan(out) | ((a == 0) & (b < 0))
    return out, bad


RAW_KERNELS: OpTable = {
    UnaryOp.NEG: lambda a: _ok(-a),
    UnaryOp.SIN: lambda a: _ok(np.sin(a)),
    UnaryOp.COS: lambda a: _ok(np.cos(a)),
    UnaryOp.TANH: lambda a: _ok(np.tanh(a)),
    UnaryOp.EXP: lambda a: _ok(np.exp(a)),
    UnaryOp.LOG: _raw_log,
    UnaryOp.SQRT: _raw_sqrt,
    UnaryOp.ABS: lambda a: _ok(np.abs(a)),
    UnaryOp.ERF: lambda a: _ok(np.asarray(erf(a), dtype=float)),
    BinaryOp.ADD: lambda a, b: _ok(a + b),
    BinaryOp.SUB: lambda a, b: _ok(a - b),
    BinaryOp.MUL: lambda a, b: _ok(a * b),
    BinaryOp.DIV: _raw_div,
    BinaryOp.POW: _raw_pow,
}


DOMAIN_REASON = "domain violation"
OVERFLOW_REASON = "overflow"


@dataclass(frozen=True)
class EvalReport:
    values: np.ndarray
    domain_violations: int
    overflows: int = 0

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def reasons(self) -> Dict[str, int]:
        """Invalid row counts keyed by reason; empty when every row is valid."""
        counts = {DOMAIN_REASON: self.domain_violations, OVERFLOW_REASON: self.overflows}
        return {k: v for k, v in counts.items() if v}


def _eval(node: Expr, X: np.ndarray, table: OpTable) -> KernelResult:
    n = X.shape[0]
    if isinstance(node, Constant):
        return np.full(n, node.value), np.zeros(n, dtype=bool)
    if isinstance(node, Variable):
        return X[:, node.index], np.zeros(n, dtype=bool)
    if isinstance(node, Unary):
        v, bad = _eval(node.child, X, table)
        out, bad2 = table[node.op](v)
        # a kernel only violates its domain on finite operands
        return out, bad | (bad2 & np.isfinite(v))
    if isinstance(node, Binary):
        a, bad_a = _eval(node.left, X, table)
        b, bad_b = _eval(node.right, X, table)
        out, bad2 = table[node.op](a, b)
        return out, bad_a | bad_b | (bad2 & np.isfinite(a) & np.isfinite(b))
    raise TypeError(f"Not an expression node: {node!r}")


def _as_matrix(matrix: Union[np.ndarray, Sequence[Sequence[float]]]) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"Expected a rows x features matrix, got shape {X.shape}")
    return X


def evaluate_batch(
    expr: Expr,
    matrix: Union[np.ndarray, Sequence[Sequence[float]]],
    table: OpTable = RAW_KERNELS,
) -> EvalReport:
    """Evaluate every row; invalid rows carry NaN and are counted by reason, never raised."""
    X = _as_matrix(matrix)
    need = arity(expr)
    if X.shape[1] < need:
        raise ValueError(f"Expression needs {need} features, matrix has {X.shape[1]}")
    with np.errstate(all="ignore"):
        values, bad = _eval(expr, X, table)
        values = np.array(values, dtype=float, copy=True)
    overflow = ~bad & ~np.isfinite(values)
    values[bad | overflow] = np.nan
    return EvalReport(
        values=values,
        domain_violations=int(np.count_nonzero(bad)),
        overflows=int(np.count_nonzero(overflow)),
    )


def predict(expr: Expr, matrix: np.ndarray, table: OpTable = RAW_KERNELS) -> np.ndarray:
    """Row values with NaN where evaluation was invalid."""
    return evaluate_batch(expr, matrix, table).values


def evaluate(expr: Expr, row: Sequence[float], table: OpTable = RAW_KERNELS) -> float:
    """Evaluate a single row, raising DomainViolation or NumericOverflow on an invalid result."""
    vec = np.asarray(row, dtype=float).reshape(1, -1)
    report = evaluate_batch(expr, vec, table)
    if report.domain_violations:
        raise DomainViolation(f"Domain violation evaluating at {list(vec[0])}")
    if report.overflows:
        raise NumericOverflow(f"Overflow evaluating at {list(vec[0])}")
    return float(report.values[0])


__all__ = [
    "DIV_EPSILON",
    "DOMAIN_REASON",
    "EvalReport",
    "Kernel",
    "OVERFLOW_REASON",
    "OpTable",
    "RAW_KERNELS",
    "evaluate",
    "evaluate_batch",
    "predict",
]
