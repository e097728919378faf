"""Translate a dependence budget ``delta`` into the tail threshold ``gamma``.

Spearman and Kendall invert in closed form. Pearson inverts in closed form
for Bernoulli marginals; otherwise the smallest ``gamma`` whose pairwise
correlation drops to ``delta`` is found by bisection, using that the
correlation of the coupling is nonincreasing in ``gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dependence import Measure, analytic_dependence_gamma, pearson_lhs
from .errors import ConvergenceError, DomainError, InfeasibleError
from .marginals import Bernoulli, Exponential, MarginalDist

GAMMA_TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class CalibrationResult:
    gamma: float
    delta_achieved: float
    method: str  # "closed_form" or "bisection"
    iterations: int = 0


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return delta


def _pearson_ratio(dist: MarginalDist, gamma: float, var: float) -> float:
    return pearson_lhs(dist, gamma) / var


def _bisect_pearson(dist: MarginalDist, delta: float, lo: float) -> CalibrationResult:
    var = dist.moments()[1]
    hi = float(np.nextafter(1.0, 0.0))
    g_lo = _pearson_ratio(dist, lo, var) - delta
    g_hi = _pearson_ratio(dist, hi, var) - delta
    if not (g_lo > 0.0 and g_hi <= 0.0):
        raise InfeasibleError(
            f"bisection bracket [{lo}, {hi}] does not straddle delta={delta} "
            f"(residuals {g_lo:.3e}, {g_hi:.3e})"
        )
    it = 0
    # invariant: ratio(lo) > delta >= ratio(hi); hi converges to min I_delta
    while hi - lo > GAMMA_TOL:
        if it >= MAX_ITER:
            raise ConvergenceError(f"Pearson bisection did not converge in {MAX_ITER} steps")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pearson_ratio(dist, mid, var) - delta > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return CalibrationResult(hi, _pearson_ratio(dist, hi, var), "bisection", it)


def gamma_from_delta(measure, delta: float, dist: MarginalDist | None = None, *, method: str | None = None) -> CalibrationResult:
    """Smallest threshold whose pairwise dependence equals ``delta``."""
    measure = Measure.parse(measure)
    delta = _check_delta(delta)
    if measure is Measure.SPEARMAN:
        g = (1.0 - delta) ** (1.0 / 3.0)
        return CalibrationResult(g, 1.0 - g**3, "closed_form")
    if measure is Measure.KENDALL:
        g = math.sqrt(1.0 - delta)
        return CalibrationResult(g, 1.0 - g * g, "closed_form")
    if dist is None:
        raise DomainError("Pearson calibration needs a marginal distribution")
    if dist.moments()[1] == 0.0:
        raise InfeasibleError("degenerate marginal: no gamma yields a positive correlation")
    if method not in (None, "closed_form", "bisection"):
        raise DomainError(f"unknown method {method!r}")
    if isinstance(dist, Bernoulli):
        p = dist.p
        if method != "bisection":
            g = 1.0 / (1.0 + delta * p / (1.0 - p))
            return CalibrationResult(g, delta_from_gamma(measure, g, dist), "closed_form")
        # below 1 - p the coupling is fully comonotone (correlation 1)
        return _bisect_pearson(dist, delta, 1.0 - p)
    if method == "closed_form":
        raise DomainError(f"no closed-form Pearson inverse for {type(dist).__name__}")
    return _bisect_pearson(dist, delta, _lower_bracket(dist, delta))


def _lower_bracket(dist: MarginalDist, delta: float) -> float:
    var = dist.moments()[1]
    lo = 0.5
    while _pearson_ratio(dist, lo, var) <= delta:
        lo *= 0.5
        if lo < 1e-300:
            raise InfeasibleError(f"correlation never exceeds delta={delta} for {dist!r}")
    return lo


def delta_from_gamma(measure, gamma: float, dist: MarginalDist | None = None) -> float:
    """Pairwise dependence of the coupling at threshold ``gamma``."""
    measure = Measure.parse(measure)
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    if measure is Measure.PEARSON:
        if dist is None:
            raise DomainError("Pearson correlation needs a marginal distribution")
        if isinstance(dist, Exponential):
            lg = math.log1p(-gamma)
            return (1.0 - gamma) * (1.0 + lg * lg / gamma)
        if isinstance(dist, Bernoulli) and gamma > 1.0 - dist.p:
            p = dist.p
            return (1.0 - p) * (1.0 - gamma) / (p * gamma)
        if dist.moments()[1] == 0.0:
            raise InfeasibleError("degenerate marginal: the delta-gamma relation is vacuous")
    return analytic_dependence_gamma(measure, gamma, dist)


def feasibility_bound(portfolio_pds: Sequence[float], alpha: float, delta: float) -> bool:
    """Whether ``gamma := alpha`` keeps every pairwise Bernoulli correlation below ``delta``."""
    pds = np.asarray(portfolio_pds, dtype=float)
    if pds.size == 0 or np.any((pds <= 0.0) | (pds >= 1.0)):
        raise DomainError("default probabilities must lie in (0, 1)")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    delta = _check_delta(delta)
    return bool(alpha >= min_feasible_gamma(pds, delta))


def min_feasible_gamma(portfolio_pds: Sequence[float], delta: float) -> float:
    """``1 / (1 + delta p_min / (1 - p_min))``."""
    p_min = float(np.min(portfolio_pds))
    return 1.0 / (1.0 + delta * p_min / (1.0 - p_min))
