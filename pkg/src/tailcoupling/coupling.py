"""The upper-comonotonic coupling family.

For a threshold ``gamma`` and independent uniforms ``U, V_1, ..., V_n`` the
coupled vector has coordinates

    X_i = F_i^{-1}(gamma * V_i)   if U <= gamma   (conditionally independent)
    X_i = F_i^{-1}(U)             if U >  gamma   (comonotone tail)

Each coordinate has law ``F_i``; below the threshold the coordinates look
independent, above it they move together.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from . import rng as _rng
from .errors import DomainError
from .marginals import MarginalDist, reparameterize


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    return gamma


@dataclass(frozen=True)
class GammaCoupling:
    gamma: float
    marginals: tuple[MarginalDist, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))
        margs = tuple(self.marginals)
        if len(margs) < 1:
            raise DomainError("a coupling needs at least one marginal")
        object.__setattr__(self, "marginals", margs)

    @property
    def n(self) -> int:
        return len(self.marginals)

    def quantiles(self, levels: np.ndarray) -> np.ndarray:
        """Apply ``F_i^{-1}`` column-wise to a ``(rows, n)`` matrix of levels."""
        return apply_quantiles(self.marginals, levels)

    def pretail_cap(self) -> np.ndarray:
        """``F_i^{-1}(gamma)`` for each coordinate."""
        return np.array([m.quantile(self.gamma) for m in self.marginals])


def apply_quantiles(marginals: Sequence[MarginalDist], levels: np.ndarray) -> np.ndarray:
    # equal marginals share one vectorized quantile call
    groups: dict[MarginalDist, list[int]] = {}
    for i, m in enumerate(marginals):
        groups.setdefault(m, []).append(i)
    if len(groups) == 1:
        return next(iter(groups))._quantile(levels)
    out = np.empty_like(levels)
    for m, cols in groups.items():
        out[:, cols] = m._quantile(levels[:, cols])
    return out


def copula_value(gamma: float, u) -> np.ndarray | float:
    """Copula of the coupling at ``u`` (last axis indexes coordinates).

    ``min(u)`` when every coordinate exceeds ``gamma``, otherwise
    ``gamma * prod(min(u_i, gamma) / gamma)``.
    """
    gamma = _check_gamma(gamma)
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    u = np.atleast_2d(u)
    if np.any((u < 0.0) | (u > 1.0)) or np.any(np.isnan(u)):
        raise DomainError("copula arguments must lie in [0, 1]")
    upper = np.all(u > gamma, axis=-1)
    lower = gamma * np.prod(np.minimum(u, gamma) / gamma, axis=-1)
    val = np.where(upper, u.min(axis=-1), lower)
    return float(val[0]) if scalar else val


def _coupled_levels(gamma: float, draws: np.ndarray) -> np.ndarray:
    u = draws[:, :1]
    return np.where(u <= gamma, gamma * draws[:, 1:], u)


def iter_sample_blocks(coupling: GammaCoupling, count: int, seed: int, workers: int = 1):
    """Yield ``(u, x)`` blocks of the coupled sample in a fixed order."""
    gamma = coupling.gamma

    def block(draws):
        return draws[:, 0].copy(), coupling.quantiles(_coupled_levels(gamma, draws))

    yield from _rng.map_blocks(count, coupling.n + 1, seed, _rng.STREAM_COUPLING, block, workers)


def map_sample_blocks(coupling: GammaCoupling, count: int, seed: int, func, workers: int = 1):
    """Apply ``func(u, x)`` per block without materializing the full sample."""
    gamma = coupling.gamma

    def block(draws):
        return func(draws[:, 0], coupling.quantiles(_coupled_levels(gamma, draws)))

    return list(
        _rng.map_blocks(count, coupling.n + 1, seed, _rng.STREAM_COUPLING, block, workers)
    )


def sample(coupling: GammaCoupling, count: int, seed: int, *, workers: int = 1, return_u: bool = False):
    """Draw ``count`` rows of the coupled vector.

    With ``return_u=True`` the common uniform of each row is returned as
    well, as ``(u, x)``; rows with ``u <= gamma`` form the pre-tail event.
    """
    if count < 1:
        raise DomainError("count must be positive")
    blocks = list(iter_sample_blocks(coupling, count, seed, workers))
    u = np.concatenate([b[0] for b in blocks])
    x = np.concatenate([b[1] for b in blocks])
    return (u, x) if return_u else x


def sample_conditional(coupling: GammaCoupling, count: int, seed: int, *, workers: int = 1, func=None):
    """Rows of ``Z`` under the conditional law on ``{U <= gamma}``: independent
    coordinates ``F_i^{-1}(gamma V_i)``. ``func`` reduces each block if given."""
    if count < 1:
        raise DomainError("count must be positive")
    gamma = coupling.gamma

    def block(draws):
        z = coupling.quantiles(gamma * draws)
        return z if func is None else func(z)

    blocks = list(_rng.map_blocks(count, coupling.n, seed, _rng.STREAM_CONDITIONAL, block, workers))
    return np.concatenate(blocks)


def comonotone_sample(marginals: Sequence[MarginalDist], count: int, seed: int, *, workers: int = 1):
    """Rows ``(F_1^{-1}(U), ..., F_n^{-1}(U))`` with one uniform per row."""
    marginals = tuple(marginals)
    if count < 1:
        raise DomainError("count must be positive")
    n = len(marginals)

    def block(draws):
        return apply_quantiles(marginals, np.repeat(draws, n, axis=1))

    return np.concatenate(
        list(_rng.map_blocks(count, 1, seed, _rng.STREAM_COMONOTONE, block, workers))
    )


def conditional_marginal(coupling: GammaCoupling, i: int) -> MarginalDist:
    """Law of coordinate ``i`` given ``U <= gamma``; cdf ``min(F_i, gamma) / gamma``."""
    if not 0 <= i < coupling.n:
        raise DomainError(f"coordinate index {i} out of range for n={coupling.n}")
    return reparameterize(coupling.marginals[i], 0.0, coupling.gamma)


def lower_orthant_dominates(gamma_hi: float, gamma_lo: float, n: int, grid_points_per_axis: int) -> bool:
    """Grid check that the ``gamma_hi`` copula lies below the ``gamma_lo`` copula."""
    gamma_hi, gamma_lo = _check_gamma(gamma_hi), _check_gamma(gamma_lo)
    if gamma_lo > gamma_hi:
        raise DomainError("need gamma_lo <= gamma_hi")
    if n < 1:
        raise DomainError("n must be at least 1")
    if grid_points_per_axis < 2:
        raise DomainError("grid needs at least two points per axis")
    axis = np.linspace(0.0, 1.0, grid_points_per_axis)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return bool(np.all(copula_value(gamma_hi, pts) <= copula_value(gamma_lo, pts) + 1e-12))


def rectangle_volumes(gamma: float, axis: np.ndarray, n: int) -> np.ndarray:
    """Copula mass of every grid cell spanned by ``axis`` in ``n`` dimensions."""
    axis = np.asarray(axis, dtype=float)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1)
    c = copula_value(gamma, pts.reshape(-1, n)).reshape((axis.size,) * n)
    vol = np.zeros((axis.size - 1,) * n)
    for corner in product((0, 1), repeat=n):
        sl = tuple(slice(1, None) if k else slice(None, -1) for k in corner)
        vol += (-1) ** (n - sum(corner)) * c[sl]
    return vol


def write_sample_csv(path, u: np.ndarray, x: np.ndarray) -> None:
    """Write a sample with header ``u,x1,...,xn``."""
    x = np.atleast_2d(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u"] + [f"x{i + 1}" for i in range(x.shape[1])])
        for ui, row in zip(u, x):
            w.writerow([repr(float(ui))] + [repr(float(v)) for v in row])
