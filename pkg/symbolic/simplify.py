"""Algebraic simplification used for node counting and equivalence short-circuits.

An expression is flattened into a polynomial over *atoms* (variables, function
applications, irreducible powers, wrapped sums). Monomials are sorted
``(atom_key, exponent)`` tuples, which gives constant folding, identity elimination,
add/mul chain flattening, ``x - x -> 0`` and ``x / x -> 1`` for free. Two candidate
forms are built: a *collected* one that keeps products of sums as factors and an
*expanded* one that multiplies them out. The smaller wins (collected on ties) and the
input is returned when neither beats it, so the node count never grows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from expr.evaluate import RAW_KERNELS
from expr.nodes import Binary, BinaryOp, Constant, Expr, Unary, UnaryOp, Variable, node_count
from expr.parser import print_infix

logger = logging.getLogger(__name__)

Exponent = Union[int, float]
Monomial = Tuple[Tuple[str, Exponent], ...]
Poly = Dict[Monomial, float]

_MAX_TERMS = 64
_MAX_EXPAND_POWER = 8
_REL_ZERO = 1e-14


@dataclass(frozen=True)
class Rewrite:
    kind: str
    detail: str
    domain_shrinking: bool = False


@dataclass(frozen=True)
class SimplifyResult:
    expr: Expr
    rewrites: Tuple[Rewrite, ...] = field(default_factory=tuple)

    @property
    def domain_shrinking(self) -> bool:
        return any(r.domain_shrinking for r in self.rewrites)


class _Overflow(ArithmeticError):
    pass


def _finite(value: float) -> float:
    if not np.isfinite(value):
        raise _Overflow(value)
    return float(value)


def _norm_exp(e: float) -> Exponent:
    e = float(e)
    return int(e) if e.is_integer() else e


def _is_const(p: Poly) -> bool:
    return all(not m for m in p)


def _const(value: float) -> Poly:
    value = _finite(value)
    return {(): value} if value != 0 else {}


def _fold(op: Union[UnaryOp, BinaryOp], *args: float) -> Optional[float]:
    arrays = [np.array([a], dtype=float) for a in args]
    with np.errstate(all="ignore"):
        values, bad = RAW_KERNELS[op](*arrays)
    v = float(values[0])
    if bool(bad[0]) or not np.isfinite(v):
        return None
    return v


def _product(factors: List[Expr]) -> Optional[Expr]:
    out: Optional[Expr] = None
    for f in factors:
        out = f if out is None else Binary(BinaryOp.MUL, out, f)
    return out


class _Walker:
    def __init__(self, expand: bool, memo: Dict[Expr, SimplifyResult]) -> None:
        self.expand = expand
        self.memo = memo
        self.atoms: Dict[str, Expr] = {}
        self.log: List[Rewrite] = []

    # --- atoms -------------------------------------------------------------------------

    def note(self, kind: str, detail: str, shrinking: bool = False) -> None:
        self.log.append(Rewrite(kind, detail, shrinking))

    def atom_key(self, e: Expr) -> str:
        key = print_infix(e)
        self.atoms.setdefault(key, e)
        return key

    def atom(self, e: Expr) -> Poly:
        return {((self.atom_key(e), 1),): 1.0}

    def wrap(self, p: Poly) -> Poly:
        if len(p) <= 1:
            return p
        return self.atom(self.build(p))

    # --- expression -> polynomial ------------------------------------------------------

    def poly(self, node: Expr) -> Poly:
        if isinstance(node, Constant):
            return _const(node.value)
        if isinstance(node, Variable):
            return self.atom(node)
        if isinstance(node, Unary):
            if node.op is UnaryOp.NEG:
                return {m: -c for m, c in self.poly(node.child).items()}
            return self.function(node.op, node.child)
        if isinstance(node, Binary):
            if node.op is BinaryOp.POW:
                return self.power(node.left, node.right)
            left, right = self.poly(node.left), self.poly(node.right)
            if node.op is BinaryOp.ADD:
                return self.add(left, right)
            if node.op is BinaryOp.SUB:
                return self.add(left, {m: -c for m, c in right.items()})
            if node.op is BinaryOp.MUL:
                return self.mul(left, right)
            return self.div(left, right)
        raise TypeError(f"Not an expression node: {node!r}")

    def function(self, op: UnaryOp, child: Expr) -> Poly:
        inner = _simplify(child, self.memo)
        self.log.extend(inner.rewrites)
        arg = inner.expr
        if isinstance(arg, Constant):
            folded = _fold(op, arg.value)
            if folded is not None:
                self.note("fold", f"{op.value}({arg.value!r})")
                return _const(folded)
        return self.atom(Unary(op, arg))

    def add(self, a: Poly, b: Poly) -> Poly:
        out = dict(a)
        for m, c in b.items():
            prev = out.get(m)
            if prev is None:
                out[m] = c
                continue
            total = prev + c
            if total == 0 or abs(total) <= _REL_ZERO * max(abs(prev), abs(c)):
                del out[m]
                if m:
                    shrink = any(not isinstance(self.atoms.get(k), Variable) or e < 0 for k, e in m)
                    self.note("cancel-term", self.describe(m), shrink)
            else:
                out[m] = _finite(total)
        return out

    def merge(self, ma: Monomial, mb: Monomial) -> Monomial:
        exps: Dict[str, Exponent] = dict(ma)
        for k, e in mb:
            if k in exps:
                total = _norm_exp(exps[k] + e)
                if total == 0:
                    del exps[k]
                    self.note("cancel-factor", k, True)
                else:
                    exps[k] = total
            else:
                exps[k] = e
        return tuple(sorted(exps.items()))

    def mul(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            other = a or b
            if any(m for m in other):
                self.note("annihilate", self.describe(next(m for m in other if m)), True)
            return {}
        if not self.expand:
            if len(a) > 1 and not _is_const(b):
                a = self.wrap(a)
            if len(b) > 1 and not _is_const(a):
                b = self.wrap(b)
        elif len(a) * len(b) > _MAX_TERMS:
            a, b = self.wrap(a), self.wrap(b)
        out: Poly = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                out = self.add(out, {self.merge(ma, mb): _finite(ca * cb)})
        return out

    def div(self, a: Poly, b: Poly) -> Poly:
        if not b:
            return self.atom(Binary(BinaryOp.DIV, self.build(a), Constant(0.0)))
        if len(b) == 1:
            ((mb, cb),) = b.items()
            inverse = tuple((k, _norm_exp(-e)) for k, e in mb)
            return self.mul(a, {inverse: _finite(1.0 / cb)})
        return self.mul(a, {((self.atom_key(self.build(b)), -1),): 1.0})

    def power(self, left: Expr, right: Expr) -> Poly:
        base, expo = self.poly(left), self.poly(right)
        if _is_const(expo):
            e = expo.get((), 0.0)
            if e == 0:
                self.note("fold", "pow(_, 0)", not _is_const(base))
                return {(): 1.0}
            if e == 1:
                return base
            integral = float(e).is_integer()
            if _is_const(base):
                folded = _fold(BinaryOp.POW, base.get((), 0.0), e)
                if folded is not None:
                    return _const(folded)
            elif len(base) == 1:
                ((mb, cb),) = base.items()
                if integral:
                    try:
                        coef = _finite(cb**e)
                    except (OverflowError, ZeroDivisionError) as exc:
                        raise _Overflow(str(exc)) from exc
                    return {tuple((k, _norm_exp(x * e)) for k, x in mb): coef}
                if cb == 1.0 and len(mb) == 1 and mb[0][1] == 1:
                    return {((mb[0][0], _norm_exp(e)),): 1.0}
            elif self.expand and integral and 2 <= e <= _MAX_EXPAND_POWER:
                out = base
                for _ in range(int(e) - 1):
                    if len(out) * len(base) > _MAX_TERMS:
                        break
                    out = self.mul(out, base)
                else:
                    return out
        return self.atom(Binary(BinaryOp.POW, self.build(base), self.build(expo)))

    # --- polynomial -> expression ------------------------------------------------------

    def describe(self, m: Monomial) -> str:
        return "*".join(k if e == 1 else f"{k}^{e}" for k, e in m)

    def factor(self, key: str, e: Exponent) -> Expr:
        base = self.atoms[key]
        return base if e == 1 else Binary(BinaryOp.POW, base, Constant(float(e)))

    def term(self, m: Monomial, coef: float) -> Expr:
        num = [self.factor(k, e) for k, e in m if e > 0]
        den = [self.factor(k, -e) for k, e in m if e < 0]
        top = _product(num)
        if top is None:
            head: Expr = Constant(coef)
        elif coef == 1.0:
            head = top
        elif coef == -1.0:
            head = Unary(UnaryOp.NEG, top)
        else:
            head = _product([Constant(coef)] + num)  # type: ignore[assignment]
        bottom = _product(den)
        return head if bottom is None else Binary(BinaryOp.DIV, head, bottom)

    def build(self, p: Poly) -> Expr:
        if not p:
            return Constant(0.0)
        result: Optional[Expr] = None
        for m in sorted(k for k in p if k):
            c = p[m]
            if result is None:
                result = self.term(m, c)
            elif c < 0:
                result = Binary(BinaryOp.SUB, result, self.term(m, -c))
            else:
                result = Binary(BinaryOp.ADD, result, self.term(m, c))
        c0 = p.get(())
        if c0 is None:
            return result  # type: ignore[return-value]
        if result is None:
            return Constant(c0)
        if c0 < 0:
            return Binary(BinaryOp.SUB, result, Constant(-c0))
        return Binary(BinaryOp.ADD, result, Constant(c0))


def _simplify(expr: Expr, memo: Dict[Expr, SimplifyResult]) -> SimplifyResult:
    cached = memo.get(expr)
    if cached is not None:
        return cached
    chosen: Optional[SimplifyResult] = None
    for expand in (False, True):
        walker = _Walker(expand, memo)
        try:
            built = walker.build(walker.poly(expr))
        except _Overflow:
            logger.debug("coefficient overflow while simplifying %s (expand=%s)", print_infix(expr), expand)
            continue
        candidate = SimplifyResult(built, tuple(walker.log))
        if chosen is None or node_count(built) < node_count(chosen.expr):
            chosen = candidate
    if chosen is None or node_count(chosen.expr) > node_count(expr):
        chosen = SimplifyResult(expr)
    memo[expr] = chosen
    return chosen


def simplify_with_log(expr: Expr) -> SimplifyResult:
    """Simplify and report the rewrites applied, flagging domain-shrinking ones."""
    return _simplify(expr, {})


def simplify(expr: Expr) -> Expr:
    return _simplify(expr, {}).expr


def simplified_node_count(expr: Expr) -> int:
    return node_count(simplify(expr))


__all__ = ["Rewrite", "SimplifyResult", "simplified_node_count", "simplify", "simplify_with_log"]
