"""One-dimensional loss distributions and their quantile calculus.

Every distribution exposes a right-continuous ``cdf``, the left-continuous
generalized inverse ``quantile(u) = inf{a : F(a) >= u}`` and exact integrals

    integrate_quantile_power(a, b, k) = int_a^b quantile(u)**k du,  k in {1, 2}

which is all the downstream dependence, calibration and risk formulas need.
The integrals are closed forms (or exact finite sums for atomic laws);
no numerical quadrature happens here.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

_ONE_MINUS = float(np.nextafter(1.0, 0.0))


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


def _check_unit_open(u):
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise DomainError("quantile level must lie in the open interval (0, 1)")


def _check_interval(a, b, power):
    if power not in (1, 2):
        raise DomainError(f"power must be 1 or 2, got {power!r}")
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise DomainError(f"integration bounds must lie in [0, 1], got ({a}, {b})")
    if a > b:
        raise DomainError(f"lower bound {a} exceeds upper bound {b}")


class MarginalDist(ABC):
    """Immutable one-dimensional law on the real line."""

    def cdf(self, x):
        x, scalar = _as_array(x)
        return _out(self._cdf(x), scalar)

    def quantile(self, u):
        u, scalar = _as_array(u)
        _check_unit_open(u)
        return _out(self._quantile(u), scalar)

    def integrate_quantile_power(self, a: float, b: float, power: int = 1) -> float:
        a, b = float(a), float(b)
        _check_interval(a, b, power)
        if a == b:
            return 0.0
        return float(self._integral(a, b, power))

    def moments(self) -> tuple[float, float]:
        """Return ``(mean, variance)``."""
        m1 = self._integral(0.0, 1.0, 1)
        m2 = self._integral(0.0, 1.0, 2)
        return float(m1), float(max(m2 - m1 * m1, 0.0))

    @property
    def mean(self) -> float:
        return self.moments()[0]

    @property
    def variance(self) -> float:
        return self.moments()[1]

    @property
    def is_degenerate(self) -> bool:
        return self.variance == 0.0

    @property
    def is_atomic(self) -> bool:
        """True when the law has finitely many atoms (exact convolution applies)."""
        return False

    @abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _quantile(self, u: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _integral(self, a: float, b: float, power: int) -> float: ...


@dataclass(frozen=True)
class Bernoulli(MarginalDist):
    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"Bernoulli parameter must lie in (0, 1), got {self.p}")

    @property
    def _q0(self) -> float:
        # quantile jumps from 0 to 1 at this level
        return 1.0 - self.p

    def _cdf(self, x):
        return np.where(x < 0.0, 0.0, np.where(x < 1.0, self._q0, 1.0))

    def _quantile(self, u):
        return np.where(u > self._q0, 1.0, 0.0)

    def _integral(self, a, b, power):
        return max(0.0, b - max(a, self._q0))

    def moments(self):
        return self.p, self.p * (1.0 - self.p)

    @property
    def is_atomic(self):
        return True

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([0.0, 1.0]), np.array([1.0 - self.p, self.p])


@dataclass(frozen=True)
class Exponential(MarginalDist):
    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DomainError(f"Exponential rate must be positive, got {self.rate}")

    def _cdf(self, x):
        return np.where(x <= 0.0, 0.0, -np.expm1(-self.rate * np.maximum(x, 0.0)))

    def _quantile(self, u):
        return -np.log1p(-u) / self.rate

    @staticmethod
    def _antiderivative(u: float, power: int) -> float:
        # unit-rate antiderivatives of (-ln(1-u))**power, written in w = 1 - u
        w = 1.0 - u
        lw = math.log1p(-u) if w > 0.0 else 0.0
        if power == 1:
            return w * lw + u
        return -(w * lw * lw - 2.0 * w * lw + 2.0 * w)

    def _integral(self, a, b, power):
        val = self._antiderivative(b, power) - self._antiderivative(a, power)
        return val / self.rate**power

    def moments(self):
        return 1.0 / self.rate, 1.0 / self.rate**2


@dataclass(frozen=True)
class Uniform01(MarginalDist):
    def _cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def _quantile(self, u):
        return u.copy()

    def _integral(self, a, b, power):
        k = power + 1
        return (b**k - a**k) / k

    def moments(self):
        return 0.5, 1.0 / 12.0


@dataclass(frozen=True)
class Dirac(MarginalDist):
    point: float

    def _cdf(self, x):
        return np.where(x >= self.point, 1.0, 0.0)

    def _quantile(self, u):
        return np.full_like(u, self.point)

    def _integral(self, a, b, power):
        return self.point**power * (b - a)

    def moments(self):
        return float(self.point), 0.0

    @property
    def is_atomic(self):
        return True

    def atoms(self):
        return np.array([float(self.point)]), np.array([1.0])


class Discrete(MarginalDist):
    """Finitely many atoms ``values`` with probabilities ``probs``.

    The cumulative levels are stored once and used by both ``cdf`` and
    ``quantile``, so the Galois relation ``cdf(x) >= u <=> quantile(u) <= x``
    holds exactly in floating point.
    """

    def __init__(self, values, probs, levels=None):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise DomainError("a discrete law needs at least one atom")
        if levels is None:
            probs = np.asarray(probs, dtype=float).ravel()
            if probs.shape != values.shape:
                raise DomainError("values and probs must have the same length")
            if np.any(probs < 0.0) or not np.all(np.isfinite(probs)):
                raise DomainError("atom probabilities must be finite and non-negative")
            total = probs.sum()
            if total <= 0.0:
                raise DomainError("atom probabilities sum to zero")
            order = np.argsort(values, kind="stable")
            values, probs = values[order], probs[order] / total
            keep = probs > 0.0
            values, probs = values[keep], probs[keep]
            # clip so rounding overshoot cannot make the levels decrease
            levels = np.minimum(np.cumsum(probs), 1.0)
            levels[-1] = 1.0
        else:
            levels = np.asarray(levels, dtype=float).ravel()
            if np.any(np.diff(values) < 0.0):
                raise DomainError("atom values must be sorted ascending")
        probs = np.diff(levels, prepend=0.0)
        for arr in (values, probs, levels):
            arr.setflags(write=False)
        self.values, self.probs, self.levels = values, probs, levels

    def _cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        padded = np.concatenate(([0.0], self.levels))
        return padded[idx]

    def _quantile(self, u):
        idx = np.searchsorted(self.levels, u, side="left")
        return self.values[np.minimum(idx, self.values.size - 1)]

    def _partial(self, t: float, power: int) -> float:
        # int_0^t quantile(u)**power du for the step function
        vk = self.values**power
        j = int(np.searchsorted(self.levels, t, side="left"))
        if j >= vk.size:
            return float(np.dot(self.probs, vk))
        below = float(np.dot(self.probs[:j], vk[:j]))
        start = self.levels[j - 1] if j > 0 else 0.0
        return below + (t - start) * vk[j]

    def _integral(self, a, b, power):
        return self._partial(b, power) - self._partial(a, power)

    def moments(self):
        mean = float(np.dot(self.probs, self.values))
        var = float(np.dot(self.probs, (self.values - mean) ** 2))
        return mean, var

    @property
    def is_atomic(self):
        return True

    def atoms(self):
        return self.values, self.probs

    def __repr__(self):
        return f"Discrete(n_atoms={self.values.size})"


class Empirical(Discrete):
    """Equal-weight law of a sample with ``quantile(u) = x_(ceil(u N))``."""

    def __init__(self, values):
        values = np.sort(np.asarray(values, dtype=float).ravel())
        if values.size == 0:
            raise DomainError("an empirical law needs at least one value")
        if not np.all(np.isfinite(values)):
            raise DomainError("empirical values must be finite")
        n = values.size
        super().__init__(values, None, levels=np.arange(1, n + 1) / n)

    def __repr__(self):
        return f"Empirical(n={self.values.size})"


@dataclass(frozen=True)
class Reparameterized(MarginalDist):
    """Law with quantile ``u -> base.quantile(lo + (hi - lo) u)``.

    ``lo = 0, hi = gamma`` gives the conditional law on ``{U <= gamma}``;
    ``lo = alpha, hi = 1`` gives the tail law beyond the alpha-quantile.
    """

    base: MarginalDist
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise DomainError(f"need 0 <= lo < hi <= 1, got ({self.lo}, {self.hi})")

    def _level(self, u):
        v = self.lo + (self.hi - self.lo) * u
        return np.clip(v, np.nextafter(0.0, 1.0), _ONE_MINUS)

    def _cdf(self, x):
        f = self.base._cdf(x)
        return np.clip((f - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def _quantile(self, u):
        return self.base._quantile(self._level(u))

    def _integral(self, a, b, power):
        width = self.hi - self.lo
        lo = self.lo if a == 0.0 else min(self.lo + width * a, self.hi)
        hi = self.hi if b == 1.0 else min(self.lo + width * b, self.hi)
        return self.base._integral(lo, hi, power) / width


def reparameterize(dist: MarginalDist, lo: float, hi: float) -> MarginalDist:
    """Law of ``dist.quantile(lo + (hi - lo) W)`` for ``W`` uniform on (0, 1).

    Bernoulli, Dirac and atomic laws are mapped to the same family exactly;
    continuous kinds are wrapped in :class:`Reparameterized`.
    """
    lo, hi = float(lo), float(hi)
    if not 0.0 <= lo < hi <= 1.0:
        raise DomainError(f"need 0 <= lo < hi <= 1, got ({lo}, {hi})")
    if lo == 0.0 and hi == 1.0:
        return dist
    if isinstance(dist, Dirac):
        return dist
    if isinstance(dist, Bernoulli):
        q0 = dist._q0
        if q0 <= lo:
            return Dirac(1.0)
        if q0 >= hi:
            return Dirac(0.0)
        return Bernoulli((hi - q0) / (hi - lo))
    if isinstance(dist, Discrete):
        width = hi - lo
        levels = np.clip((dist.levels - lo) / width, 0.0, 1.0)
        probs = np.diff(levels, prepend=0.0)
        keep = probs > 0.0
        if keep.sum() == 1:
            return Dirac(float(dist.values[keep][0]))
        return Discrete(dist.values[keep], probs[keep])
    return Reparameterized(dist, lo, hi)


def from_sample(values: Sequence[float]) -> Empirical:
    """Equal-weight empirical law of ``values`` (any order)."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise DomainError("cannot build an empirical law from an empty sample")
    return Empirical(values)


def quantile(dist: MarginalDist, u):
    return dist.quantile(u)


def cdf(dist: MarginalDist, x):
    return dist.cdf(x)


def moments(dist: MarginalDist) -> tuple[float, float]:
    return dist.moments()


def integrate_quantile_power(dist: MarginalDist, a: float, b: float, power: int = 1) -> float:
    return dist.integrate_quantile_power(a, b, power)


def atoms_of(dist: MarginalDist) -> tuple[np.ndarray, np.ndarray]:
    """Atom locations and masses of an atomic law."""
    if not dist.is_atomic:
        raise DomainError(f"{type(dist).__name__} has no finite atom representation")
    return dist.atoms()
