"""Seeded Monte Carlo oracle for the analytic paths.

Every estimator samples through the counter-based streams of :mod:`rng`,
so an estimate depends on ``(seed, samples)`` only and not on ``workers``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .aggregation import _as_aggregation
from .coupling import GammaCoupling, map_sample_blocks, sample
from .dependence import Measure, aggregate_pairwise, pairwise_dependence
from .errors import DomainError
from .marginals import Empirical, MarginalDist
from .riskmeasures import expectile

N_BATCHES = 20


@dataclass(frozen=True)
class McConfig:
    samples: int = 10**6
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if int(self.samples) < 1000:
            raise DomainError(f"samples must be at least 1000, got {self.samples}")
        if int(self.workers) < 1:
            raise DomainError("workers must be at least 1")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "workers", int(self.workers))


class QuantileEstimate(NamedTuple):
    estimate: float
    stderr_proxy: float
    lower: float
    upper: float


class SweepPoint(NamedTuple):
    gamma: float
    estimate: float
    stderr: float


class MeanEstimate(NamedTuple):
    estimate: float
    stderr: float


def aggregate_sample(coupling: GammaCoupling, f, cfg: McConfig) -> np.ndarray:
    """``f`` applied to ``cfg.samples`` rows of the coupled vector, streamed blockwise."""
    agg = _as_aggregation(f, coupling.n)
    blocks = map_sample_blocks(coupling, cfg.samples, cfg.seed, lambda u, x: agg(x), cfg.workers)
    return np.concatenate(blocks)


def quantile_bracket(values: np.ndarray, alpha: float) -> QuantileEstimate:
    """Empirical quantile with an order-statistic error bracket.

    The bracket is the empirical quantile at ``alpha -/+ 2 sqrt(alpha(1-alpha)/N)``
    and the proxy is a quarter of its width, roughly one standard error
    without assuming a density.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    law = Empirical(values)
    n = law.values.size
    half = 2.0 * np.sqrt(alpha * (1.0 - alpha) / n)
    lo_level = max(alpha - half, 0.5 / n)
    hi_level = min(alpha + half, 1.0 - 0.5 / n)
    est = float(law.quantile(alpha))
    lo, hi = float(law.quantile(lo_level)), float(law.quantile(hi_level))
    return QuantileEstimate(est, (hi - lo) / 4.0, lo, hi)


def mc_var(coupling: GammaCoupling, f, alpha: float, cfg: McConfig = McConfig()) -> QuantileEstimate:
    """Empirical left-continuous ``alpha``-quantile of ``f(X)``."""
    return quantile_bracket(aggregate_sample(coupling, f, cfg), alpha)


def _batch_stderr(stat, data: np.ndarray, batches: int = N_BATCHES) -> float:
    # standard error from the spread of the statistic over contiguous batches
    parts = np.array_split(data, batches)
    vals = np.array([stat(p) for p in parts])
    return float(vals.std(ddof=1) / np.sqrt(batches))


def mc_dependence(
    measure,
    coupling: GammaCoupling,
    cfg: McConfig = McConfig(),
    aggregator: str = "weighted_max",
    weights=None,
) -> MeanEstimate:
    """Empirical dependence of a coupled sample, aggregated over pairs."""
    measure = Measure.parse(measure)
    if coupling.n < 2:
        raise DomainError("dependence needs at least two coordinates")
    x = sample(coupling, cfg.samples, cfg.seed, workers=cfg.workers)

    def stat(rows):
        return aggregate_pairwise(pairwise_dependence(measure, rows), aggregator, weights)

    return MeanEstimate(stat(x), _batch_stderr(stat, x))


def mc_dependence_sweep(
    measure,
    marginals: Sequence[MarginalDist],
    gamma_grid: Sequence[float],
    cfg: McConfig = McConfig(),
    aggregator: str = "weighted_max",
) -> list[SweepPoint]:
    """Estimated dependence of the coupling at each threshold on the grid."""
    marginals = tuple(marginals)
    out = []
    for g in gamma_grid:
        est = mc_dependence(measure, GammaCoupling(g, marginals), cfg, aggregator)
        out.append(SweepPoint(float(g), est.estimate, est.stderr))
    return out


def mc_expectile(coupling: GammaCoupling, f, alpha: float, cfg: McConfig = McConfig()) -> MeanEstimate:
    """Expectile of the empirical law of ``f(X)``, with a batch-means standard error."""
    values = aggregate_sample(coupling, f, cfg)
    est = expectile(Empirical(values), alpha)
    return MeanEstimate(est, _batch_stderr(lambda v: expectile(Empirical(v), alpha), values))


def mc_joint_cdf(coupling: GammaCoupling, points, cfg: McConfig = McConfig()) -> np.ndarray:
    """Empirical ``P(U_1 <= t_1, ..., U_n <= t_n)`` of the coupled uniforms.

    Requires Uniform01 marginals so that the sample lives on the copula scale.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != coupling.n:
        raise DomainError(f"points must have {coupling.n} columns")

    def count(u, x):
        return np.array([np.all(x <= p, axis=1).sum() for p in points])

    totals = np.sum(map_sample_blocks(coupling, cfg.samples, cfg.seed, count, cfg.workers), axis=0)
    return totals / cfg.samples
