"""Seeded random expression generation (grow / full) for GP initialisation and property tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from expr.nodes import Binary, BinaryOp, Constant, Expr, Unary, UnaryOp, Variable

RngLike = Union[np.random.Generator, int, None]

DEFAULT_UNARY: Tuple[UnaryOp, ...] = (
    UnaryOp.SIN,
    UnaryOp.COS,
    UnaryOp.EXP,
    UnaryOp.LOG,
    UnaryOp.SQRT,
    UnaryOp.TANH,
    UnaryOp.ERF,
)
DEFAULT_BINARY: Tuple[BinaryOp, ...] = (BinaryOp.ADD, BinaryOp.SUB, BinaryOp.MUL, BinaryOp.DIV)


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class Grammar:
    """Primitive choices plus the depth bound a generated tree must respect."""

    n_features: int
    unary_ops: Sequence[UnaryOp] = field(default=DEFAULT_UNARY)
    binary_ops: Sequence[BinaryOp] = field(default=DEFAULT_BINARY)
    max_depth: int = 6
    const_range: Tuple[float, float] = (-5.0, 5.0)
    p_constant: float = 0.3
    # Chance that "grow" stops early at a leaf when depth still allows an operator.
    p_leaf: float = 0.3

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if not self.unary_ops and not self.binary_ops:
            raise ValueError("grammar needs at least one operator")

    def leaf(self, rng: np.random.Generator) -> Expr:
        if rng.random() < self.p_constant:
            lo, hi = self.const_range
            return Constant(round(float(rng.uniform(lo, hi)), 3))
        return Variable(int(rng.integers(self.n_features)))

    def _operator(self, rng: np.random.Generator, budget: int) -> Expr:
        n_u, n_b = len(self.unary_ops), len(self.binary_ops)
        pick = int(rng.integers(n_u + n_b))
        if pick < n_u:
            return Unary(self.unary_ops[pick], self._node(rng, budget - 1))
        op = self.binary_ops[pick - n_u]
        left = self._node(rng, budget - 1)
        right = self._node(rng, budget - 1)
        return Binary(op, left, right)

    def _node(self, rng: np.random.Generator, budget: int, full: bool = False) -> Expr:
        if budget <= 1:
            return self.leaf(rng)
        if not full and rng.random() < self.p_leaf:
            return self.leaf(rng)
        return self._full(rng, budget) if full else self._operator(rng, budget)

    def _full(self, rng: np.random.Generator, budget: int) -> Expr:
        if budget <= 1:
            return self.leaf(rng)
        n_u, n_b = len(self.unary_ops), len(self.binary_ops)
        pick = int(rng.integers(n_u + n_b))
        if pick < n_u:
            return Unary(self.unary_ops[pick], self._full(rng, budget - 1))
        op = self.binary_ops[pick - n_u]
        return Binary(op, self._full(rng, budget - 1), self._full(rng, budget - 1))

    def grow(self, rng: RngLike, max_depth: Optional[int] = None) -> Expr:
        return self._node(as_generator(rng), max_depth or self.max_depth)

    def full(self, rng: RngLike, max_depth: Optional[int] = None) -> Expr:
        return self._full(as_generator(rng), max_depth or self.max_depth)


def random_expr(grammar: Grammar, rng: RngLike, method: str = "grow") -> Expr:
    """Draw one tree of depth <= grammar.max_depth; a bound of 1 always yields a leaf."""
    if method == "grow":
        return grammar.grow(rng)
    if method == "full":
        return grammar.full(rng)
    raise ValueError(f"Unknown generation method {method!r}")


def ramped_half_and_half(grammar: Grammar, size: int, rng: RngLike, min_depth: int = 2) -> list:
    """Population initialisation alternating grow/full over depths min_depth..max_depth."""
    gen = as_generator(rng)
    top = max(grammar.max_depth, 1)
    low = min(min_depth, top)
    depths = list(range(low, top + 1))
    out = []
    for i in range(size):
        d = depths[i % len(depths)]
        out.append(grammar._node(gen, d) if i % 2 == 0 else grammar._full(gen, d))
    return out


__all__ = [
    "DEFAULT_BINARY",
    "DEFAULT_UNARY",
    "Grammar",
    "RngLike",
    "as_generator",
    "ramped_half_and_half",
    "random_expr",
]
