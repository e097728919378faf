"""One-dimensional tail risk measures.

All functions take a marginal distribution and work from its quantile
function and exact quantile integrals, so discrete kinds need no smoothing.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DomainError
from .marginals import Dirac, MarginalDist, reparameterize

MAX_ITER = 400


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def var(dist: MarginalDist, alpha: float) -> float:
    """Left-continuous quantile ``inf{x : F(x) >= alpha}``."""
    return float(dist.quantile(_check_alpha(alpha)))


def es(dist: MarginalDist, alpha: float) -> float:
    """Expected shortfall, the average of ``var`` over levels in ``[alpha, 1)``."""
    alpha = _check_alpha(alpha)
    return dist.integrate_quantile_power(alpha, 1.0, 1) / (1.0 - alpha)


def partial_moments(dist: MarginalDist, e: float) -> tuple[float, float]:
    """``(E(T - e)_+, E(T - e)_-)`` in closed form from quantile integrals."""
    level = float(np.clip(dist.cdf(e), 0.0, 1.0))
    upper = dist.integrate_quantile_power(level, 1.0, 1) - e * (1.0 - level)
    lower = e * level - dist.integrate_quantile_power(0.0, level, 1)
    return max(upper, 0.0), max(lower, 0.0)


def expectile_residual(dist: MarginalDist, alpha: float, e: float) -> float:
    up, down = partial_moments(dist, e)
    return alpha * up - (1.0 - alpha) * down


def expectile(dist: MarginalDist, alpha: float) -> float:
    """Root of ``alpha E(T-e)_+ = (1-alpha) E(T-e)_-``, found by bisection.

    The residual is continuous and strictly decreasing in ``e``, so the
    root is unique. Bisection runs down to adjacent floats, which leaves
    the residual far below ``1e-12``.
    """
    alpha = _check_alpha(alpha)
    if isinstance(dist, Dirac) or dist.is_degenerate:
        return float(dist.quantile(0.5))
    lo = float(dist.quantile(1e-9))
    hi = float(dist.quantile(1.0 - 1e-9))
    # the root lies in the convex hull of the support; widen if the
    # truncated quantile range misses it (heavy tails at extreme alpha)
    span = max(hi - lo, 1.0)
    for _ in range(200):
        if expectile_residual(dist, alpha, lo) >= 0.0:
            break
        lo -= span
        span *= 2.0
    span = max(hi - lo, 1.0)
    for _ in range(200):
        if expectile_residual(dist, alpha, hi) <= 0.0:
            break
        hi += span
        span *= 2.0
    r_lo = expectile_residual(dist, alpha, lo)
    r_hi = expectile_residual(dist, alpha, hi)
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # adjacent floats: keep the endpoint closer to the root
            return lo if abs(r_lo) <= abs(r_hi) else hi
        r = expectile_residual(dist, alpha, mid)
        if r == 0.0:
            return mid
        if r > 0.0:
            lo, r_lo = mid, r
        else:
            hi, r_hi = mid, r
    raise ConvergenceError(f"expectile bisection did not converge in {MAX_ITER} steps")


def bernoulli_expectile(p: float, alpha: float) -> float:
    """Closed form ``alpha p / (alpha p + (1 - alpha)(1 - p))``."""
    return alpha * p / (alpha * p + (1.0 - alpha) * (1.0 - p))


def tail_distribution(dist: MarginalDist, alpha: float) -> MarginalDist:
    """Law with quantile ``u -> F^{-1}(alpha + (1 - alpha) u)``."""
    return reparameterize(dist, _check_alpha(alpha), 1.0)


def tails_equal(dist1: MarginalDist, dist2: MarginalDist, alpha: float, grid: int = 64, tol: float = 1e-10) -> bool:
    """Compare quantiles at ``alpha + k (1 - alpha) / grid`` for ``k < grid``."""
    alpha = _check_alpha(alpha)
    if grid < 2:
        raise DomainError("grid must be at least 2")
    levels = alpha + np.arange(grid) * (1.0 - alpha) / grid
    q1 = np.asarray(dist1.quantile(levels), dtype=float)
    q2 = np.asarray(dist2.quantile(levels), dtype=float)
    return bool(np.all(np.abs(q1 - q2) <= tol))
