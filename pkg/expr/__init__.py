"""Expression trees: representation, evaluation, counting, parsing and printing."""

from expr.evaluate import (
    DIV_EPSILON,
    DOMAIN_REASON,
    OVERFLOW_REASON,
    RAW_KERNELS,
    EvalReport,
    evaluate,
    evaluate_batch,
    predict,
)
from expr.nodes import (
    Binary,
    BinaryOp,
    Constant,
    Expr,
    Unary,
    UnaryOp,
    Variable,
    arity,
    constants,
    depth,
    internal_count,
    leaf_count,
    node_count,
    variables,
    x,
)
from expr.parser import parse, print_infix
from expr.random_tree import Grammar, random_expr

__all__ = [
    "Binary",
    "BinaryOp",
    "Constant",
    "DIV_EPSILON",
    "DOMAIN_REASON",
    "EvalReport",
    "Expr",
    "Grammar",
    "OVERFLOW_REASON",
    "RAW_KERNELS",
    "Unary",
    "UnaryOp",
    "Variable",
    "arity",
    "constants",
    "depth",
    "evaluate",
    "evaluate_batch",
    "internal_count",
    "leaf_count",
    "node_count",
    "parse",
    "predict",
    "print_infix",
    "random_expr",
    "variables",
    "x",
]
