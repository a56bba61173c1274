"""Immutable expression-tree nodes and structural helpers.

Trees are built from four frozen node kinds (Constant, Variable, Unary, Binary) and are
shared freely between threads. Every structural query and rebuild here walks the tree with an
explicit stack, so deep GP offspring never hit the recursion limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union


class UnaryOp(str, Enum):
    NEG = "neg"
    SIN = "sin"
    COS = "cos"
    TANH = "tanh"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"
    ABS = "abs"
    ERF = "erf"


class BinaryOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    POW = "pow"


class _ExprOps:
    """Operator sugar so ground truths read like the formulas they encode."""

    __slots__ = ()

    def __add__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.ADD, self, as_expr(other))  # type: ignore[arg-type]

    def __radd__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.ADD, as_expr(other), self)  # type: ignore[arg-type]

    def __sub__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.SUB, self, as_expr(other))  # type: ignore[arg-type]

    def __rsub__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.SUB, as_expr(other), self)  # type: ignore[arg-type]

    def __mul__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.MUL, self, as_expr(other))  # type: ignore[arg-type]

    def __rmul__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.MUL, as_expr(other), self)  # type: ignore[arg-type]

    def __truediv__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.DIV, self, as_expr(other))  # type: ignore[arg-type]

    def __rtruediv__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.DIV, as_expr(other), self)  # type: ignore[arg-type]

    def __pow__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.POW, self, as_expr(other))  # type: ignore[arg-type]

    def __rpow__(self, other: "ExprLike") -> "Binary":
        return Binary(BinaryOp.POW, as_expr(other), self)  # type: ignore[arg-type]

    def __neg__(self) -> "Unary":
        return Unary(UnaryOp.NEG, self)  # type: ignore[arg-type]


@dataclass(frozen=True, slots=True)
class Constant(_ExprOps):
    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError(f"Constant must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True, slots=True)
class Variable(_ExprOps):
    index: int

    def __post_init__(self) -> None:
        if int(self.index) != self.index or self.index < 0:
            raise ValueError(f"Variable index must be a non-negative integer, got {self.index!r}")
        object.__setattr__(self, "index", int(self.index))


@dataclass(frozen=True, slots=True)
class Unary(_ExprOps):
    op: UnaryOp
    child: "Expr"


@dataclass(frozen=True, slots=True)
class Binary(_ExprOps):
    op: BinaryOp
    left: "Expr"
    right: "Expr"


Expr = Union[Constant, Variable, Unary, Binary]
ExprLike = Union[Expr, float, int]

# Unary functions callable by name in the exchange format (neg is spelled "-").
FUNCTION_NAMES: Tuple[str, ...] = tuple(op.value for op in UnaryOp if op is not UnaryOp.NEG)


def as_expr(value: ExprLike) -> Expr:
    if isinstance(value, (Constant, Variable, Unary, Binary)):
        return value
    return Constant(float(value))


def x(index: int) -> Variable:
    return Variable(index)


def apply(op: UnaryOp, child: ExprLike) -> Unary:
    return Unary(op, as_expr(child))


def sin(e: ExprLike) -> Unary:
    return apply(UnaryOp.SIN, e)


def cos(e: ExprLike) -> Unary:
    return apply(UnaryOp.COS, e)


def log(e: ExprLike) -> Unary:
    return apply(UnaryOp.LOG, e)


def exp(e: ExprLike) -> Unary:
    return apply(UnaryOp.EXP, e)


def sqrt(e: ExprLike) -> Unary:
    return apply(UnaryOp.SQRT, e)


def erf(e: ExprLike) -> Unary:
    return apply(UnaryOp.ERF, e)


def children(node: Expr) -> Tuple[Expr, ...]:
    if isinstance(node, Unary):
        return (node.child,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    return ()


def iter_preorder(expr: Expr) -> Iterator[Expr]:
    stack: List[Expr] = [expr]
    while stack:
        node = stack.pop()
        yield node
        kids = children(node)
        stack.extend(reversed(kids))


def node_count(expr: Expr) -> int:
    """Number of nodes; every Constant, Variable, Unary and Binary counts once."""
    return sum(1 for _ in iter_preorder(expr))


def leaf_count(expr: Expr) -> int:
    return sum(1 for n in iter_preorder(expr) if isinstance(n, (Constant, Variable)))


def internal_count(expr: Expr) -> int:
    return sum(1 for n in iter_preorder(expr) if isinstance(n, (Unary, Binary)))


def depth(expr: Expr) -> int:
    """Depth with leaves at depth 1."""
    best = 0
    stack: List[Tuple[Expr, int]] = [(expr, 1)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        for kid in children(node):
            stack.append((kid, d + 1))
    return best


def variables(expr: Expr) -> frozenset:
    return frozenset(n.index for n in iter_preorder(expr) if isinstance(n, Variable))


def arity(expr: Expr) -> int:
    """Smallest feature count the expression can be evaluated against."""
    used = variables(expr)
    return max(used) + 1 if used else 0


def constants(expr: Expr) -> List[float]:
    return [n.value for n in iter_preorder(expr) if isinstance(n, Constant)]


def subtrees(expr: Expr) -> List[Expr]:
    return list(iter_preorder(expr))


def _rebuild(expr: Expr, visit: Callable[[Expr], Optional[Expr]]) -> Expr:
    """Post-order rebuild. ``visit`` sees nodes in preorder; a non-None result replaces the node."""
    out: List[Expr] = []
    stack: List[Tuple[Expr, bool]] = [(expr, False)]
    while stack:
        node, done = stack.pop()
        if done:
            kids = children(node)
            built = out[len(out) - len(kids):]
            del out[len(out) - len(kids):]
            if all(b is k for b, k in zip(built, kids)):
                out.append(node)
            elif isinstance(node, Unary):
                out.append(Unary(node.op, built[0]))
            else:
                out.append(Binary(node.op, built[0], built[1]))
            continue
        swapped = visit(node)
        if swapped is not None:
            out.append(swapped)
        elif isinstance(node, (Unary, Binary)):
            stack.append((node, True))
            stack.extend((kid, False) for kid in reversed(children(node)))
        else:
            out.append(node)
    return out[0]


def replace_subtree(expr: Expr, index: int, new: Expr) -> Expr:
    """Return a copy of ``expr`` with the preorder node ``index`` replaced by ``new``."""
    if index < 0:
        raise IndexError(index)
    counter = 0

    def visit(node: Expr) -> Optional[Expr]:
        nonlocal counter
        here = counter
        counter += 1
        if here != index:
            return None
        # the replaced subtree keeps its preorder numbers
        counter += node_count(node) - 1
        return new

    out = _rebuild(expr, visit)
    if index >= counter:
        raise IndexError(index)
    return out


def with_constants(expr: Expr, values: Sequence[float]) -> Expr:
    """Rebuild ``expr`` with its constants (preorder) replaced by ``values``."""
    it = iter(values)

    def visit(node: Expr) -> Optional[Expr]:
        if not isinstance(node, Constant):
            return None
        value = next(it, None)
        if value is None:
            raise ValueError("fewer values than constants")
        return Constant(value)

    out = _rebuild(expr, visit)
    if next(it, None) is not None:
        raise ValueError("more values than constants")
    return out


__all__ = [
    "BinaryOp",
    "Binary",
    "Constant",
    "Expr",
    "ExprLike",
    "FUNCTION_NAMES",
    "Unary",
    "UnaryOp",
    "Variable",
    "apply",
    "arity",
    "as_expr",
    "children",
    "constants",
    "cos",
    "depth",
    "erf",
    "exp",
    "internal_count",
    "iter_preorder",
    "leaf_count",
    "log",
    "node_count",
    "replace_subtree",
    "sin",
    "sqrt",
    "subtrees",
    "variables",
    "with_constants",
    "x",
]
