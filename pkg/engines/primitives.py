"""Search-time primitive set: which operators GP may compose and how partial ones are protected.

Protected semantics only exist while searching. ``lower`` rewrites a search tree into an
ordinary expression whose RAW evaluation matches what the search saw (analytic quotient
becomes ``a / sqrt(1 + b**2)``, protected log/sqrt become ``log(abs(.))`` / ``sqrt(abs(.))``),
so scoring never sees a surrogate operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np

from errors import ConfigurationError
from expr.evaluate import DIV_EPSILON, RAW_KERNELS, KernelResult, OpTable
from expr.nodes import Binary, BinaryOp, Constant, Expr, Unary, UnaryOp, Variable
from expr.random_tree import Grammar
from expr.special import erf_rational
from models.configs import DivisionPolicy, GpConfig

LOG_EPSILON = 1e-12

_OP_NAMES: Dict[str, Union[UnaryOp, BinaryOp]] = {op.value: op for op in UnaryOp}
_OP_NAMES.update({op.value: op for op in BinaryOp})


def _fine(values: np.ndarray) -> KernelResult:
    return values, np.zeros(values.shape, dtype=bool)


def _protected_div(a: np.ndarray, b: np.ndarray) -> KernelResult:
    tiny = np.abs(b) < DIV_EPSILON
    return _fine(np.where(tiny, 1.0, a / np.where(tiny, 1.0, b)))


def _analytic_quotient(a: np.ndarray, b: np.ndarray) -> KernelResult:
    return _fine(a / np.sqrt(1.0 + b * b))


def _protected_log(a: np.ndarray) -> KernelResult:
    return _fine(np.log(np.abs(a) + LOG_EPSILON))


def _protected_sqrt(a: np.ndarray) -> KernelResult:
    return _fine(np.sqrt(np.abs(a)))


def search_kernels(division: DivisionPolicy) -> OpTable:
    table = dict(RAW_KERNELS)
    table[UnaryOp.LOG] = _protected_log
    table[UnaryOp.SQRT] = _protected_sqrt
    table[UnaryOp.ERF] = lambda a: _fine(np.asarray(erf_rational(a), dtype=float))
    if division is DivisionPolicy.PROTECTED:
        table[BinaryOp.DIV] = _protected_div
    elif division is DivisionPolicy.ANALYTIC_QUOTIENT:
        table[BinaryOp.DIV] = _analytic_quotient
    return table


@dataclass(frozen=True)
class PrimitiveSet:
    unary: Tuple[UnaryOp, ...]
    binary: Tuple[BinaryOp, ...]
    division: DivisionPolicy = DivisionPolicy.ANALYTIC_QUOTIENT
    kernels: OpTable = field(default_factory=dict, compare=False)

    @classmethod
    def from_names(cls, names: Iterable[str], division: DivisionPolicy) -> "PrimitiveSet":
        unary, binary = [], []
        for name in names:
            op = _OP_NAMES.get(name)
            if op is None:
                raise ConfigurationError(f"unknown primitive {name!r}")
            (unary if isinstance(op, UnaryOp) else binary).append(op)
        if not binary:
            raise ConfigurationError("primitive set needs at least one binary operator")
        return cls(tuple(unary), tuple(binary), division, search_kernels(division))

    @classmethod
    def from_config(cls, cfg: GpConfig) -> "PrimitiveSet":
        return cls.from_names(cfg.primitives, cfg.division)

    def grammar(self, n_features: int, max_depth: int) -> Grammar:
        return Grammar(
            n_features=n_features,
            unary_ops=self.unary,
            binary_ops=self.binary,
            max_depth=max_depth,
        )

    def lower(self, expr: Expr) -> Expr:
        """Rewrite a search tree so RAW evaluation reproduces the protected semantics."""
        if isinstance(expr, (Constant, Variable)):
            return expr
        if isinstance(expr, Unary):
            child = self.lower(expr.child)
            if expr.op in (UnaryOp.LOG, UnaryOp.SQRT):
                return Unary(expr.op, Unary(UnaryOp.ABS, child))
            return Unary(expr.op, child)
        left, right = self.lower(expr.left), self.lower(expr.right)
        if expr.op is BinaryOp.DIV and self.division is DivisionPolicy.ANALYTIC_QUOTIENT:
            denom = Unary(UnaryOp.SQRT, Binary(BinaryOp.ADD, Constant(1.0), Binary(BinaryOp.POW, right, Constant(2.0))))
            return Binary(BinaryOp.DIV, left, denom)
        return Binary(expr.op, left, right)


def default_primitives(names: Sequence[str] = ()) -> PrimitiveSet:
    cfg = GpConfig() if not names else GpConfig(primitives=list(names))
    return PrimitiveSet.from_config(cfg)


__all__ = ["LOG_EPSILON", "PrimitiveSet", "default_primitives", "search_kernels"]
