"""Tail risk of aggregate losses ``f(X)`` under the coupling.

Above the threshold the aggregate behaves comonotonically: for nondecreasing
left-continuous ``f`` and ``alpha >= gamma``

    VaR^alpha(f(X)) = q(alpha) = f(F_1^{-1}(alpha), ..., F_n^{-1}(alpha)).

Below it, ``VaR^alpha(f(X))`` equals the ``alpha / gamma`` quantile of
``f(Z)`` where ``Z`` has independent coordinates distributed as the
conditional marginals on ``{U <= gamma}``. For weighted sums of atomic
marginals that law is computed exactly by convolution; everything else
falls back to seeded Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from . import rng as _rng
from .coupling import GammaCoupling, apply_quantiles, conditional_marginal, sample_conditional
from .errors import DomainError, HypothesisNotSatisfied
from .marginals import Bernoulli, Dirac, Discrete, Empirical, MarginalDist
from .riskmeasures import expectile

DEFAULT_MAX_ATOMS = 5000
MIN_MC_BUDGET = 1000
# widest integer lattice convolved directly before switching to atom merging
_MAX_LATTICE = 1 << 22


@dataclass(frozen=True)
class WeightedSum:
    """``f(x) = sum_i weights_i x_i`` with nonnegative weights."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in np.ravel(self.weights))
        if not w:
            raise DomainError("weights must be non-empty")
        if any(not np.isfinite(v) or v < 0.0 for v in w):
            raise DomainError("weighted-sum weights must be finite and non-negative")
        object.__setattr__(self, "weights", w)

    @classmethod
    def ones(cls, n: int) -> "WeightedSum":
        return cls((1.0,) * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ np.asarray(self.weights)


class CustomAggregation:
    """A user-supplied nondecreasing, left-continuous ``f``.

    ``func`` maps an ``(m, n)`` array of rows to ``m`` values.
    Monotonicity is only spot-checked, see :meth:`check_monotone`.
    """

    def __init__(self, func: Callable[[np.ndarray], np.ndarray], n: int | None = None):
        self.func = func
        self.n = n

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.func(np.atleast_2d(x)), dtype=float).reshape(x.shape[:-1])

    def check_monotone(self, marginals: Sequence[MarginalDist], probes: int = 1000, seed: int = 0) -> None:
        """Raise if raising one coordinate ever lowers ``f``.

        Each probe draws a random level vector, picks a coordinate and
        moves its level up; both points are pushed through the marginal
        quantiles so the check stays on the support.
        """
        n = len(marginals)
        draws = _rng.open_uniform(_rng.block_generator(seed, _rng.STREAM_PROBE, 0), (probes, n + 2))
        levels = draws[:, :n]
        coord = np.minimum((draws[:, n] * n).astype(int), n - 1)
        rows = np.arange(probes)
        bumped = levels.copy()
        lo = levels[rows, coord]
        bumped[rows, coord] = lo + (1.0 - lo) * draws[:, n + 1]
        base = self(apply_quantiles(marginals, levels))
        up = self(apply_quantiles(marginals, bumped))
        bad = np.flatnonzero(up < base)
        if bad.size:
            raise DomainError(
                f"aggregation function decreased along coordinate {int(coord[bad[0]])} "
                f"in {bad.size} of {probes} probes; it must be nondecreasing"
            )


def _as_aggregation(f, n: int):
    if isinstance(f, (WeightedSum, CustomAggregation)):
        agg = f
    elif callable(f):
        agg = CustomAggregation(f, n)
    else:
        agg = WeightedSum(f)
    if isinstance(agg, WeightedSum) and agg.n != n:
        raise DomainError(f"{agg.n} weights given for {n} coordinates")
    return agg


def q_alpha(f, marginals: Sequence[MarginalDist], alpha: float) -> float:
    """``f`` at the vector of ``alpha``-quantiles: the comonotone VaR."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    marginals = tuple(marginals)
    agg = _as_aggregation(f, len(marginals))
    levels = np.full((1, len(marginals)), alpha)
    return float(np.asarray(agg(apply_quantiles(marginals, levels))).ravel()[0])


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    k = np.arange(n + 1, dtype=float)
    logpmf = (
        gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
        + k * np.log(p) + (n - k) * np.log1p(-p)
    )
    pmf = np.exp(logpmf - logpmf.max())
    return pmf / pmf.sum()


def binomial_var(n: int, p: float, alpha: float) -> int:
    """Smallest ``k`` with ``P(B(n, p) <= k) >= alpha``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    cdf = np.cumsum(_binomial_pmf(n, float(p)))
    return int(min(np.searchsorted(cdf, alpha, side="left"), n))


# -- exact laws of weighted sums of independent atomic coordinates ----------


class _TooManyAtoms(Exception):
    pass


def _is_integral(v: np.ndarray) -> bool:
    return bool(np.all(v == np.round(v)))


def _convolve(a, b, max_atoms: int):
    (va, pa), (vb, pb) = a, b
    if _is_integral(va) and _is_integral(vb):
        base_a, base_b = va.min(), vb.min()
        span_a, span_b = int(va.max() - base_a), int(vb.max() - base_b)
        if span_a + span_b < _MAX_LATTICE:
            la = np.zeros(span_a + 1)
            lb = np.zeros(span_b + 1)
            np.add.at(la, (va - base_a).astype(np.int64), pa)
            np.add.at(lb, (vb - base_b).astype(np.int64), pb)
            mass = np.convolve(la, lb)
            support = np.flatnonzero(mass > 0.0)
            if support.size > max_atoms:
                raise _TooManyAtoms
            return support + (base_a + base_b), mass[support]
    if va.size * vb.size > max_atoms * max_atoms:
        raise _TooManyAtoms
    vals, inv = np.unique(np.add.outer(va, vb).ravel(), return_inverse=True)
    if vals.size > max_atoms:
        raise _TooManyAtoms
    mass = np.bincount(inv.ravel(), weights=np.multiply.outer(pa, pb).ravel())
    return vals, mass


def _group_law(weight: float, dist: MarginalDist, count: int, max_atoms: int):
    """Law of ``weight * (D_1 + ... + D_count)`` for i.i.d. ``D_k ~ dist``."""
    if weight == 0.0 or isinstance(dist, Dirac):
        point = 0.0 if weight == 0.0 else weight * count * float(dist.point)
        return np.array([point]), np.array([1.0])
    if isinstance(dist, Bernoulli):
        return weight * np.arange(count + 1.0), _binomial_pmf(count, dist.p)
    values, probs = dist.atoms()
    law = (weight * values, probs)
    acc = law
    for _ in range(count - 1):
        acc = _convolve(acc, law, max_atoms)
    return acc


def _groups(weights, marginals):
    groups: dict[tuple[float, MarginalDist], int] = {}
    for w, m in zip(weights, marginals):
        groups[(w, m)] = groups.get((w, m), 0) + 1
    return groups


def weighted_sum_law(weights, marginals: Sequence[MarginalDist], max_atoms: int = DEFAULT_MAX_ATOMS):
    """Exact law of ``sum_i w_i D_i`` for independent atomic ``D_i``.

    Returns a :class:`Discrete`, or ``None`` when a marginal is not atomic
    or the law would need more than ``max_atoms`` atoms.
    """
    if any(not m.is_atomic for m in marginals):
        return None
    try:
        law = None
        for (w, m), count in _groups(weights, marginals).items():
            part = _group_law(w, m, count, max_atoms)
            law = part if law is None else _convolve(law, part, max_atoms)
    except _TooManyAtoms:
        return None
    if law[0].size == 1:
        return Dirac(float(law[0][0]))
    return Discrete(*law)


def conditional_distribution(f, coupling: GammaCoupling, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Exact law of ``f(Z)`` on the pre-tail event, or ``None`` if unavailable."""
    agg = _as_aggregation(f, coupling.n)
    if not isinstance(agg, WeightedSum):
        return None
    cond = [conditional_marginal(coupling, i) for i in range(coupling.n)]
    return weighted_sum_law(agg.weights, cond, max_atoms)


def _step_law(agg: WeightedSum, marginals, lo: float, hi: float):
    # values and masses of u -> f(F^{-1}(u)) for u uniform on (lo, hi)
    cuts = [lo, hi]
    for m in marginals:
        levels = np.cumsum(m.atoms()[1])
        cuts.extend(levels[(levels > lo) & (levels < hi)])
    cuts = np.unique(np.asarray(cuts))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    vals = agg(apply_quantiles(marginals, np.repeat(mids[:, None], len(marginals), axis=1)))
    return np.asarray(vals, dtype=float), np.diff(cuts)


def comonotone_distribution(f, marginals: Sequence[MarginalDist]):
    """Exact law of ``f(F_1^{-1}(U), ..., F_n^{-1}(U))`` for atomic marginals."""
    marginals = tuple(marginals)
    agg = _as_aggregation(f, len(marginals))
    if not isinstance(agg, WeightedSum) or any(not m.is_atomic for m in marginals):
        return None
    return Discrete(*_step_law(agg, marginals, 0.0, 1.0))


def aggregate_distribution(f, coupling: GammaCoupling, max_atoms: int = DEFAULT_MAX_ATOMS):
    """Exact law of ``f(X)``: ``gamma`` times the pre-tail law plus the
    comonotone piece on ``(gamma, 1)``. ``None`` if not exactly computable."""
    agg = _as_aggregation(f, coupling.n)
    cond = conditional_distribution(agg, coupling, max_atoms)
    if cond is None:
        return None
    cv, cp = cond.atoms()
    tv, tp = _step_law(agg, coupling.marginals, coupling.gamma, 1.0)
    return Discrete(np.concatenate([cv, tv]), np.concatenate([coupling.gamma * cp, tp]))


def _empirical_quantile(values: np.ndarray, level: float) -> float:
    return float(Empirical(values).quantile(level))


def conditional_var(
    f,
    coupling: GammaCoupling,
    level: float,
    mc_budget: int = 10**6,
    seed: int = 0,
    *,
    workers: int = 1,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> float:
    """``VaR^level`` of ``f(Z)`` under the conditional law on ``{U <= gamma}``.

    Equal weights over identical Bernoulli marginals use :func:`binomial_var`;
    other weighted sums of atomic marginals use the exact convolution when it
    fits in ``max_atoms``; the rest is Monte Carlo over ``mc_budget`` draws.
    """
    level = float(level)
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    agg = _as_aggregation(f, coupling.n)
    if isinstance(agg, WeightedSum):
        cond = [conditional_marginal(coupling, i) for i in range(coupling.n)]
        groups = _groups(agg.weights, cond)
        if len(groups) == 1:
            (w, m), count = next(iter(groups.items()))
            if isinstance(m, Bernoulli):
                return w * binomial_var(count, m.p, level)
        law = weighted_sum_law(agg.weights, cond, max_atoms)
        if law is not None:
            return float(law.quantile(level))
    else:
        agg.check_monotone(coupling.marginals, seed=seed)
    if mc_budget < MIN_MC_BUDGET:
        raise DomainError(f"mc_budget must be at least {MIN_MC_BUDGET}, got {mc_budget}")
    values = sample_conditional(coupling, int(mc_budget), seed, workers=workers, func=agg)
    return _empirical_quantile(values, level)


def var_aggregate(
    f,
    coupling: GammaCoupling,
    alpha: float,
    mc_budget: int = 10**6,
    seed: int = 0,
    *,
    workers: int = 1,
    max_atoms: int = DEFAULT_MAX_ATOMS,
) -> float:
    """``VaR^alpha(f(X))``: ``q(alpha)`` when ``alpha >= gamma``, else the
    ``alpha / gamma`` quantile of ``f(Z)``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha >= coupling.gamma:
        return q_alpha(f, coupling.marginals, alpha)
    return conditional_var(
        f, coupling, alpha / coupling.gamma, mc_budget, seed, workers=workers, max_atoms=max_atoms
    )


def expectile_aggregate(weights, dist: MarginalDist, gamma: float, alpha: float) -> float:
    """``ex^alpha(sum_i w_i X_i) = ex^alpha(dist) * sum_i w_i`` for identical marginals.

    Requires ``ex^alpha(dist) >= F^{-1}(gamma)``; at ``alpha = 1/2`` the
    identity is linearity of the mean and holds unconditionally.
    """
    w = np.asarray(WeightedSum(weights).weights)
    alpha, gamma = float(alpha), float(gamma)
    if not 0.5 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0.5, 1), got {alpha}")
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    ex = expectile(dist, alpha)
    if alpha > 0.5:
        cap = float(dist.quantile(gamma))
        if ex < cap:
            raise HypothesisNotSatisfied(
                f"expectile {ex:.6g} lies below the gamma-quantile {cap:.6g}; "
                "additivity is not guaranteed"
            )
    return ex * float(w.sum())


def var_ratio_curve(p: float, gamma: float, alpha: float, n_values: Sequence[int]) -> list[tuple[int, float]]:
    """``(n, VaR^alpha(S_n) / VaR^alpha_cond(S_n))`` for ``n`` unit-exposure
    Bernoulli(p) names, where ``S_n`` is their loss count.

    The numerator is ``q(alpha)``; the denominator is the binomial quantile of
    the conditional default probability ``(gamma - 1 + p) / gamma``.
    ``0 / 0`` is reported as 0 and ``x / 0`` as ``inf``.
    """
    gamma, alpha = float(gamma), float(alpha)
    if not 0.0 < gamma < 1.0 or not 0.0 < alpha < 1.0:
        raise DomainError("gamma and alpha must lie in (0, 1)")
    if gamma > alpha:
        raise DomainError(f"need gamma <= alpha, got gamma={gamma} > alpha={alpha}")
    marginal = Bernoulli(p)
    cond = conditional_marginal(GammaCoupling(gamma, (marginal,)), 0)
    per_name = float(marginal.quantile(alpha))
    out = []
    for n in n_values:
        n = int(n)
        if n < 1:
            raise DomainError("portfolio sizes must be positive")
        top = n * per_name
        if isinstance(cond, Bernoulli):
            bottom = float(binomial_var(n, cond.p, alpha))
        else:
            bottom = n * float(cond.point)
        out.append((n, _ratio(top, bottom)))
    return out


def _ratio(top: float, bottom: float) -> float:
    if bottom == 0.0:
        return 0.0 if top == 0.0 else float("inf")
    return top / bottom


def first_crossing(curve: Sequence[tuple[int, float]], threshold: float) -> int | None:
    """Smallest ``n`` on the curve whose ratio reaches ``threshold``."""
    for n, r in sorted(curve):
        if r >= threshold:
            return n
    return None


def ratio_bounds(dist: MarginalDist, alpha: float, gamma: float) -> tuple[float, float]:
    """``(VaR^alpha / ((1/alpha) int_0^alpha F^{-1}), VaR^alpha / mean)``.

    The first is a lower bound on the limsup of the ratio curve, the
    second the level it is compared against.
    """
    alpha, gamma = float(alpha), float(gamma)
    if not 0.0 < gamma <= alpha < 1.0:
        raise DomainError(f"need 0 < gamma <= alpha < 1, got gamma={gamma}, alpha={alpha}")
    head_mean = dist.integrate_quantile_power(0.0, gamma, 1) / gamma
    if head_mean <= 0.0:
        raise DomainError(f"mean below the gamma-quantile must be positive, got {head_mean}")
    v = float(dist.quantile(alpha))
    lower_mean = dist.integrate_quantile_power(0.0, alpha, 1) / alpha
    return v / lower_mean, v / dist.moments()[0]
