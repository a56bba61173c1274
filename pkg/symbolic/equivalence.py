"""Exact-rediscovery check: is the candidate the truth up to an additive or multiplicative constant?

The simplifier gets the first look at ``truth - candidate``; when that folds to a constant the
verdict is immediate. Otherwise the binding check is numeric: both models are evaluated on a
scrambled Sobol sample of the domain and the difference / ratio must be constant within
``tol``. The recovered additive constant is ``mean(truth - candidate)``; the multiplicative
one is ``mean(truth / candidate)``.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from errors import ConfigurationError, InsufficientDomain
from expr.evaluate import evaluate_batch
from expr.nodes import Binary, BinaryOp, Constant, Expr, arity
from models.records import EquivalenceVerdict, VerdictKind
from symbolic.simplify import simplify

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
N_PROBES = 256
MIN_VALID = 64

Interval = Tuple[float, float]


def probe_points(domain: Sequence[Interval], n: int = N_PROBES, seed: int = 0) -> np.ndarray:
    """Scrambled Sobol points scaled into the per-variable intervals."""
    if not domain:
        return np.zeros((n, 0))
    lo = np.array([float(a) for a, _ in domain])
    hi = np.array([float(b) for _, b in domain])
    if np.any(hi < lo):
        raise ConfigurationError("probe domain contains an empty interval")
    sampler = qmc.Sobol(d=len(domain), scramble=True, seed=seed)
    unit = sampler.random(n)
    return lo + unit * (hi - lo)


def default_domain(n_features: int, low: float = -3.0, high: float = 3.0) -> list:
    return [(low, high)] * n_features


def _constant_within(values: np.ndarray, tol: float) -> Tuple[bool, float]:
    mean = float(np.mean(values))
    spread = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return spread <= tol * (1.0 + abs(mean)), mean


def equivalent_up_to_constant(
    truth: Expr,
    candidate: Expr,
    domain: Sequence[Interval],
    tol: float = DEFAULT_TOL,
    *,
    n_probes: int = N_PROBES,
    min_valid: int = MIN_VALID,
    seed: int = 0,
) -> EquivalenceVerdict:
    need = max(arity(truth), arity(candidate))
    if len(domain) < need:
        raise ConfigurationError(f"domain covers {len(domain)} variables, expressions need {need}")

    diff = simplify(Binary(BinaryOp.SUB, truth, candidate))
    if isinstance(diff, Constant):
        return EquivalenceVerdict(kind=VerdictKind.EXACT_ADDITIVE, constant=diff.value, evidence=0)

    X = probe_points(domain, n_probes, seed)
    if X.shape[1] == 0:
        X = np.zeros((n_probes, 1))
    t = evaluate_batch(truth, X).values
    c = evaluate_batch(candidate, X).values
    ok = np.isfinite(t) & np.isfinite(c)
    valid = int(np.count_nonzero(ok))
    if valid < min_valid:
        raise InsufficientDomain(f"only {valid} of {n_probes} probe points are valid (need {min_valid})")
    t, c = t[ok], c[ok]

    is_const, offset = _constant_within(t - c, tol)
    if is_const:
        return EquivalenceVerdict(kind=VerdictKind.EXACT_ADDITIVE, constant=offset, evidence=valid)

    if np.all(np.abs(c) > tol):
        is_const, factor = _constant_within(t / c, tol)
        if is_const and factor != 0.0:
            return EquivalenceVerdict(kind=VerdictKind.EXACT_MULTIPLICATIVE, constant=factor, evidence=valid)

    return EquivalenceVerdict(kind=VerdictKind.NOT_EQUIVALENT, evidence=valid)


def safe_verdict(
    truth: Optional[Expr],
    candidate: Optional[Expr],
    domain: Sequence[Interval],
    tol: float = DEFAULT_TOL,
) -> Optional[EquivalenceVerdict]:
    """Verdict for harness use: no truth means no verdict, an unjudgeable model is NotEquivalent."""
    if truth is None:
        return None
    if candidate is None:
        return EquivalenceVerdict(kind=VerdictKind.NOT_EQUIVALENT)
    try:
        return equivalent_up_to_constant(truth, candidate, domain, tol)
    except (InsufficientDomain, ConfigurationError) as exc:
        logger.info("equivalence not judgeable: %s", exc)
        return EquivalenceVerdict(kind=VerdictKind.NOT_EQUIVALENT)


__all__ = [
    "DEFAULT_TOL",
    "MIN_VALID",
    "N_PROBES",
    "default_domain",
    "equivalent_up_to_constant",
    "probe_points",
    "safe_verdict",
]
