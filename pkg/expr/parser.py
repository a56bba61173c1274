"""Infix exchange format: parsing and printing.

The format is the CAS-compatible string entrants hand back: operators ``+ - * / **``,
function-call syntax for unary functions, variables ``x0``.. (``x_0`` accepted), decimal or
scientific constants. Printing uses standard precedence with the fewest parentheses that
still re-parse to the identical tree: same-precedence right operands are always wrapped, and
a minus written directly before a literal (not followed by ``**``) denotes a negative
constant, so ``Unary(neg, Constant(3))`` prints as ``-(3.0)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from errors import ParseError
from expr.nodes import (
    FUNCTION_NAMES,
    Binary,
    BinaryOp,
    Constant,
    Expr,
    Unary,
    UnaryOp,
    Variable,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<pow>\*\*)
  | (?P<op>[-+*/])
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)
_VARIABLE_RE = re.compile(r"^x_?(\d+)$")

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5

_BINARY_SYMBOL = {
    BinaryOp.ADD: " + ",
    BinaryOp.SUB: " - ",
    BinaryOp.MUL: " * ",
    BinaryOp.DIV: " / ",
    BinaryOp.POW: "**",
}
_BINARY_PREC = {
    BinaryOp.ADD: _PREC_ADD,
    BinaryOp.SUB: _PREC_ADD,
    BinaryOp.MUL: _PREC_MUL,
    BinaryOp.DIV: _PREC_MUL,
    BinaryOp.POW: _PREC_POW,
}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"Unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset: int = 0) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i = min(self.i + 1, len(self.tokens) - 1)
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            what = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ParseError(f"Expected {kind}, found {what}", tok.pos)
        return self.take()

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"Unexpected {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = BinaryOp.ADD if self.take().text == "+" else BinaryOp.SUB
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = BinaryOp.MUL if self.take().text == "*" else BinaryOp.DIV
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            nxt, after = self.peek(1), self.peek(2)
            if nxt.kind == "number" and after.kind != "pow":
                self.take()
                self.take()
                return Constant(-float(nxt.text))
            self.take()
            return Unary(UnaryOp.NEG, self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind == "pow":
            self.take()
            return Binary(BinaryOp.POW, base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.take()
            return Constant(float(tok.text))
        if tok.kind == "lparen":
            self.take()
            node = self.expr()
            self.expect("rparen")
            return node
        if tok.kind == "name":
            self.take()
            if self.peek().kind == "lparen":
                if tok.text not in FUNCTION_NAMES:
                    raise ParseError(f"Unknown function {tok.text!r}", tok.pos)
                self.take()
                arg = self.expr()
                self.expect("rparen")
                return Unary(UnaryOp(tok.text), arg)
            m = _VARIABLE_RE.match(tok.text)
            if not m:
                raise ParseError(f"Unknown name {tok.text!r}", tok.pos)
            return Variable(int(m.group(1)))
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ParseError(f"Unexpected {what}", tok.pos)


def parse(text: str) -> Expr:
    """Parse an infix model string into an expression tree."""
    return _Parser(text).parse()


def _wrap(text: str) -> str:
    return f"({text})"


def _render(node: Expr) -> Tuple[str, int]:
    if isinstance(node, Constant):
        text = repr(node.value)
        return (text, _PREC_NEG) if text.startswith("-") else (text, _PREC_ATOM)
    if isinstance(node, Variable):
        return f"x{node.index}", _PREC_ATOM
    if isinstance(node, Unary):
        child, prec = _render(node.child)
        if node.op is UnaryOp.NEG:
            if isinstance(node.child, Constant) and prec == _PREC_ATOM:
                return f"-({child})", _PREC_NEG
            return ("-" + (child if prec >= _PREC_NEG else _wrap(child))), _PREC_NEG
        return f"{node.op.value}({child})", _PREC_ATOM
    if isinstance(node, Binary):
        prec = _BINARY_PREC[node.op]
        left, lp = _render(node.left)
        right, rp = _render(node.right)
        if node.op is BinaryOp.POW:
            if lp <= _PREC_POW:
                left = _wrap(left)
            if rp < _PREC_NEG:
                right = _wrap(right)
        else:
            if lp < prec:
                left = _wrap(left)
            if rp <= prec:
                right = _wrap(right)
        return left + _BINARY_SYMBOL[node.op] + right, prec
    raise TypeError(f"Not an expression node: {node!r}")


def print_infix(expr: Expr) -> str:
    """Render an expression as an infix exchange string."""
    return _render(expr)[0]


def try_parse(text: Optional[str]) -> Optional[Expr]:
    if not text:
        return None
    try:
        return parse(text)
    except ParseError:
        return None


__all__ = ["parse", "print_infix", "try_parse"]
