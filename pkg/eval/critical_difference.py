"""Friedman test and Nemenyi critical difference over a datasets x algorithms rank matrix.

The q constants are the two-tailed Nemenyi values q_alpha = studentized range / sqrt(2)
for infinite degrees of freedom, as tabled in Demsar (2006) and in Orange's
``compute_CD``; they are data here, never computed at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from scipy.stats import chi2

from errors import ConfigurationError, UnsupportedK

# index 0 -> k=2
_Q_005 = (
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.94832, 3.030879, 3.101730, 3.163684,
    3.218654, 3.268004, 3.312739, 3.353618, 3.39123, 3.426041, 3.458425, 3.488685, 3.517073,
    3.543799,
)
_Q_010 = (
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889,
    2.977768, 3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224,
    3.319233,
)
Q_TABLES: Dict[float, Sequence[float]] = {0.05: _Q_005, 0.10: _Q_010}
MAX_K = 2 + len(_Q_005) - 1


@dataclass(slots=True)
class FriedmanNemenyi:
    statistic: float
    p_value: float
    critical_difference: float
    mean_ranks: np.ndarray
    alpha: float
    n_datasets: int
    groups: List[List[int]] = field(default_factory=list)


def q_alpha(k: int, alpha: float = 0.05) -> float:
    if alpha not in Q_TABLES:
        raise ConfigurationError(f"alpha must be one of {sorted(Q_TABLES)}, got {alpha}")
    if k < 2:
        raise ConfigurationError("the Nemenyi test needs at least two algorithms")
    if k > MAX_K:
        raise UnsupportedK(f"no tabled q for k={k} (max {MAX_K})")
    return Q_TABLES[alpha][k - 2]


def critical_difference(k: int, n_datasets: int, alpha: float = 0.05) -> float:
    """CD = q_alpha,k * sqrt(k(k+1) / (6N))."""
    return q_alpha(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * n_datasets))


def friedman_statistic(rank_matrix: np.ndarray) -> float:
    """Friedman chi-square from mean ranks; zero when every algorithm has the same mean rank."""
    n, k = rank_matrix.shape
    mean_ranks = rank_matrix.mean(axis=0)
    stat = 12.0 * n / (k * (k + 1)) * (float(np.sum(mean_ranks**2)) - k * (k + 1) ** 2 / 4.0)
    # float noise around an exact zero
    return max(0.0, stat)


def nemenyi_groups(mean_ranks: Sequence[float], cd: float) -> List[List[int]]:
    """Maximal runs of algorithms (by mean rank) whose spread stays within one CD.

    Returned as column indices, each group ordered by mean rank, groups ordered by their
    lowest member.
    """
    values = np.asarray(mean_ranks, dtype=float)
    order = [int(i) for i in np.argsort(values, kind="stable")]
    groups: List[List[int]] = []
    last_end = -1
    for start in range(len(order)):
        end = start
        while end + 1 < len(order) and values[order[end + 1]] - values[order[start]] <= cd + 1e-12:
            end += 1
        if end > last_end:
            groups.append(order[start : end + 1])
            last_end = end
    return groups


def friedman_nemenyi(rank_matrix: np.ndarray, alpha: float = 0.05) -> FriedmanNemenyi:
    ranks = np.asarray(rank_matrix, dtype=float)
    if ranks.ndim != 2:
        raise ConfigurationError("rank matrix must be datasets x algorithms")
    n, k = ranks.shape
    if n < 2 or k < 2:
        raise ConfigurationError(f"need at least 2 datasets and 2 algorithms, got {n}x{k}")
    cd = critical_difference(k, n, alpha)
    stat = friedman_statistic(ranks)
    p_value = float(chi2.sf(stat, k - 1))
    mean_ranks = ranks.mean(axis=0)
    return FriedmanNemenyi(
        statistic=stat,
        p_value=p_value,
        critical_difference=cd,
        mean_ranks=mean_ranks,
        alpha=alpha,
        n_datasets=n,
        groups=nemenyi_groups(mean_ranks, cd),
    )


__all__ = [
    "FriedmanNemenyi",
    "MAX_K",
    "Q_TABLES",
    "critical_difference",
    "friedman_nemenyi",
    "friedman_statistic",
    "nemenyi_groups",
    "q_alpha",
]
