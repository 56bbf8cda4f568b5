"""
Correlation statistics and the hypergeometric enrichment tail.

All functions are pure. Heavy lifting (log-gamma, regularized incomplete
beta, average ranks) comes from scipy.special / scipy.stats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special
from scipy.stats import rankdata

from .exceptions import StatisticsError


@dataclass(frozen=True)
class ContingencyCounts:
    population: int                 # N
    successes_in_population: int    # K
    sample: int                     # n
    successes_in_sample: int        # k

    def __post_init__(self):
        N, K, n, k = self.population, self.successes_in_population, self.sample, self.successes_in_sample
        if min(N, K, n, k) < 0:
            raise StatisticsError(f"contingency counts must be non-negative: {self}")
        if K > N or n > N:
            raise StatisticsError(f"contingency counts exceed population: {self}")
        if k > min(n, K) or (n - k) > (N - K):
            raise StatisticsError(f"impossible contingency counts: {self}")


def _as_pair(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise StatisticsError("undefined correlation: inputs must be equal-length lists")
    if x.size < 2:
        raise StatisticsError("undefined correlation: need at least 2 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise StatisticsError("undefined correlation: constant input")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _as_pair(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(float(np.dot(dx, dx)) * float(np.dot(dy, dy))))
    return min(1.0, max(-1.0, r))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties share the mean rank)."""
    x, y = _as_pair(xs, ys)
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def pearson_pvalue_two_tailed(r: float, n: int) -> float:
    """
    Two-tailed p-value of Pearson's r under H0 (Student's t, n-2 dof).

    P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2), with t^2 = r^2 df / (1 - r^2).
    """
    if n < 3:
        raise StatisticsError(f"p-value needs n >= 3 (got {n})")
    if not abs(r) <= 1.0 + 1e-12:
        raise StatisticsError(f"correlation out of range: {r}")
    if abs(r) >= 1.0:
        return 0.0
    if r == 0.0:
        return 1.0

    df = n - 2
    r2 = r * r
    # df/(df+t^2) simplifies to 1 - r^2
    p = float(special.betainc(df / 2.0, 0.5, 1.0 - r2))
    return min(1.0, max(0.0, p))


def _log_choose(n: int, k: int) -> float:
    return float(special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1))


def hypergeom_logpmf(c: ContingencyCounts, i: int) -> float:
    """log P(X = i) for X ~ Hypergeometric(N, K, n); -inf outside the support."""
    N, K, n = c.population, c.successes_in_population, c.sample
    if i < max(0, n - (N - K)) or i > min(n, K):
        return -math.inf
    return _log_choose(K, i) + _log_choose(N - K, n - i) - _log_choose(N, n)


def hypergeom_pmf(c: ContingencyCounts, i: int) -> float:
    return math.exp(hypergeom_logpmf(c, i))


def hypergeom_sf(c: ContingencyCounts) -> float:
    """Inclusive upper tail P(X >= k), summed in log space."""
    k = c.successes_in_sample
    if k == 0:
        return 1.0

    upper = min(c.sample, c.successes_in_population)
    lower = max(k, c.sample - (c.population - c.successes_in_population))
    if lower > upper:
        return 0.0

    terms = np.array([hypergeom_logpmf(c, i) for i in range(lower, upper + 1)])
    return min(1.0, float(np.exp(special.logsumexp(terms))))
