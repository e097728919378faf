"""Dependence measures: estimators, closed forms under the coupling, aggregation.

Pearson correlation uses population normalization with the ``0/0 := 0``
convention. Spearman's rho is the Pearson correlation of mid-ranks and
Kendall's tau is ``(concordant - discordant) / (N choose 2)`` with tied
pairs counted as neither.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .marginals import MarginalDist


class Measure(str, enum.Enum):
    PEARSON = "pearson"
    SPEARMAN = "spearman"
    KENDALL = "kendall"

    @classmethod
    def parse(cls, value) -> "Measure":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown dependence measure {value!r}") from None


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def _tie_pairs(x: np.ndarray) -> float:
    _, counts = np.unique(x, return_counts=True)
    counts = counts.astype(float)
    return float(np.sum(counts * (counts - 1.0)) / 2.0)


def _kendall_tau_a(x: np.ndarray, y: np.ndarray) -> float:
    n = x.size
    n0 = n * (n - 1) / 2.0
    n1, n2 = _tie_pairs(x), _tie_pairs(y)
    if n1 == n0 or n2 == n0:
        return 0.0
    # scipy returns tau-b; rescale its denominator to the total pair count
    tau_b = stats.kendalltau(x, y, variant="b").statistic
    tau_a = tau_b * np.sqrt((n0 - n1) * (n0 - n2)) / n0
    return float(np.clip(tau_a, -1.0, 1.0))


def estimate_dependence(measure, pairs) -> float:
    """Empirical dependence of an ``(N, 2)`` array of observations."""
    measure = Measure.parse(measure)
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise DomainError("pairs must have shape (N, 2)")
    if pairs.shape[0] < 2:
        raise DomainError("at least two pairs are needed")
    x, y = pairs[:, 0], pairs[:, 1]
    if measure is Measure.PEARSON:
        return _pearson(x, y)
    if measure is Measure.SPEARMAN:
        return _pearson(stats.rankdata(x), stats.rankdata(y))
    return _kendall_tau_a(x, y)


def pairwise_dependence(measure, sample) -> np.ndarray:
    """``n x n`` matrix of pairwise estimates with ``nan`` on the diagonal."""
    sample = np.asarray(sample, dtype=float)
    n = sample.shape[1]
    out = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = estimate_dependence(measure, sample[:, [i, j]])
    return out


def pearson_lhs(dist: MarginalDist, gamma: float) -> float:
    """Covariance of two coordinates of the coupling with identical marginals.

    ``(1/gamma) (int_0^gamma F^{-1})^2 + int_gamma^1 (F^{-1})^2 - mean^2``;
    nonincreasing in ``gamma``, equal to the variance as ``gamma -> 0``.
    """
    head = dist.integrate_quantile_power(0.0, gamma, 1)
    tail_sq = dist.integrate_quantile_power(gamma, 1.0, 2)
    mean = dist.moments()[0]
    return head * head / gamma + tail_sq - mean * mean


def analytic_dependence_gamma(measure, gamma: float, dist: MarginalDist | None = None) -> float:
    """Closed-form pairwise dependence of the coupling at threshold ``gamma``."""
    measure = Measure.parse(measure)
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if measure is Measure.SPEARMAN:
        return 1.0 - gamma**3
    if measure is Measure.KENDALL:
        return 1.0 - gamma**2
    if dist is None:
        raise DomainError("Pearson correlation needs a marginal distribution")
    var = dist.moments()[1]
    if var == 0.0:
        # degenerate marginal: 0/0 := 0
        return 0.0
    return float(np.clip(pearson_lhs(dist, gamma) / var, -1.0, 1.0))


AGGREGATORS = ("weighted_sum", "weighted_min", "weighted_max")


def _offdiag(rho: np.ndarray) -> np.ndarray:
    n = rho.shape[0]
    mask = ~np.eye(n, dtype=bool)
    return rho[mask]


def aggregate_pairwise(rho_matrix, aggregator: str = "weighted_max", weights=None) -> float:
    """Combine the off-diagonal entries (row-major order) into one value.

    ``weights`` may be a scalar, a vector over the ``n(n-1)`` off-diagonal
    entries, or a full ``n x n`` matrix whose diagonal is ignored. The
    default is weight one for min/max and ``1 / n(n-1)`` for the sum.
    """
    if aggregator not in AGGREGATORS:
        raise DomainError(f"aggregator must be one of {AGGREGATORS}, got {aggregator!r}")
    rho = np.asarray(rho_matrix, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
        raise DomainError("rho_matrix must be square with n >= 2")
    entries = _offdiag(rho)
    m = entries.size
    if weights is None:
        w = np.full(m, 1.0 / m if aggregator == "weighted_sum" else 1.0)
    else:
        w = np.asarray(weights, dtype=float)
        if w.ndim == 2:
            w = _offdiag(w)
        w = np.broadcast_to(w, (m,)).astype(float)
    if np.any((w < 0.0) | (w > 1.0)):
        raise DomainError("aggregation weights must lie in [0, 1]")
    if aggregator == "weighted_sum":
        if w.sum() > 1.0 + 1e-12:
            raise DomainError("weighted-sum weights must sum to at most 1")
        return float(np.dot(w, entries))
    vals = w * entries
    return float(vals.min() if aggregator == "weighted_min" else vals.max())


@dataclass(frozen=True)
class DependenceConstraint:
    """One-sided budget ``measure(X) <= delta`` after pairwise aggregation."""

    measure: Measure
    delta: float
    aggregator: str = "weighted_max"
    weights: object = None

    def __post_init__(self):
        object.__setattr__(self, "measure", Measure.parse(self.measure))
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.aggregator not in AGGREGATORS:
            raise DomainError(f"unknown aggregator {self.aggregator!r}")

    def evaluate(self, sample) -> float:
        rho = pairwise_dependence(self.measure, sample)
        return aggregate_pairwise(rho, self.aggregator, self.weights)


@dataclass(frozen=True)
class ReducedConstraint:
    """Several budgets folded into one: ``combine(values) <= delta``."""

    delta: float
    scales: tuple[float, ...]
    constraints: tuple = field(default=(), repr=False)
    lower_scales: tuple[float, ...] | None = None

    def _utilization(self, values: Sequence[float]) -> float:
        # largest rho_j / bound_j; the budget holds iff this is <= 1
        values = np.asarray(values, dtype=float)
        if values.shape != (len(self.scales),):
            raise DomainError(f"expected {len(self.scales)} values, got {values.shape}")
        ratio = values / np.asarray(self.scales)
        if self.lower_scales is not None:
            ratio = np.maximum(ratio, values / np.asarray(self.lower_scales))
        return float(ratio.max())

    def combine(self, values: Sequence[float]) -> float:
        return self.delta * self._utilization(values)

    def holds(self, values: Sequence[float]) -> bool:
        return self._utilization(values) <= 1.0

    def evaluate(self, sample) -> float:
        if not self.constraints:
            raise DomainError("this reduction was built without measures to evaluate")
        return self.combine([c.evaluate(sample) for c in self.constraints])

    def __call__(self, values: Sequence[float]) -> float:
        return self.combine(values)


def _as_constraint(c) -> DependenceConstraint:
    if isinstance(c, DependenceConstraint):
        return c
    measure, delta = c
    return DependenceConstraint(measure, float(delta))


def reduce_constraints(constraints) -> tuple[ReducedConstraint, float]:
    """Fold ``rho_j <= delta_j`` into ``max_j (delta / delta_j) rho_j <= delta``
    with ``delta = min_j delta_j``."""
    cons = tuple(_as_constraint(c) for c in constraints)
    if not cons:
        raise DomainError("at least one constraint is required")
    scales = tuple(c.delta for c in cons)
    delta = min(scales)
    return ReducedConstraint(delta, scales, cons), delta


def reduce_two_sided(bounds: Sequence[tuple[float, float]]) -> tuple[ReducedConstraint, float]:
    """Fold ``rho_j in [lo_j, hi_j]`` (``lo_j < 0 < hi_j``) into one budget.

    ``delta = min_j min(hi_j, -lo_j)`` and the folded value is
    ``delta * max_j max(rho_j / hi_j, rho_j / lo_j)``.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if not bounds:
        raise DomainError("at least one constraint is required")
    for lo, hi in bounds:
        if not (0.0 < hi < 1.0 and 0.0 < -lo < 1.0):
            raise DomainError(f"need -lo and hi in (0, 1), got ({lo}, {hi})")
    delta = min(min(hi, -lo) for lo, hi in bounds)
    return (
        ReducedConstraint(delta, tuple(hi for _, hi in bounds), (), tuple(lo for lo, _ in bounds)),
        delta,
    )

