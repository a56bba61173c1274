"""Simplification and exact-rediscovery equivalence."""

from symbolic.equivalence import equivalent_up_to_constant, probe_points
from symbolic.simplify import SimplifyResult, simplified_node_count, simplify, simplify_with_log

__all__ = [
    "SimplifyResult",
    "equivalent_up_to_constant",
    "probe_points",
    "simplified_node_count",
    "simplify",
    "simplify_with_log",
]
