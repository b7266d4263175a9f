"""Single-dimension LDP mechanisms on the unit interval.

Every mechanism is an immutable distribution object indexed by the true
input ``x``.  It exposes the density (or point mass) of the perturbed
output, any point atoms, the CDF, closed-form interval probabilities and a
sampler that takes the random generator explicitly.

Unbounded noise mechanisms (Laplace, Gaussian) are clamped to ``[0, 1]``,
so the tails they would put outside the domain become atoms at 0 and 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import ClassVar

import numpy as np
from scipy.special import ndtr

from .errors import CompositionError, DomainError, IntervalError, ParameterError

ATOL = 1e-12
MIN_EPSILON = 1e-6
DEFAULT_GRID = 100

FAMILIES = ("laplace", "gaussian", "pm", "sw", "krr", "exponential")
PURE_FAMILIES = ("laplace", "pm", "sw", "krr", "exponential")
DISCRETE_FAMILIES = ("krr", "exponential")


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy budget of one mechanism; ``delta == 0`` means pure LDP."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ParameterError(f"epsilon must be positive, got {self.epsilon}")
        if not (0.0 <= self.delta < 1.0):
            raise ParameterError(f"delta must lie in [0, 1), got {self.delta}")


@dataclass(frozen=True)
class IntervalProbability:
    value: float
    includes_left_atom: bool = False
    includes_right_atom: bool = False

    def __float__(self) -> float:
        return self.value


def _check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps) or eps < MIN_EPSILON:
        raise ParameterError(
            f"epsilon must be a finite value >= {MIN_EPSILON:g}, got {eps}"
        )
    return eps


def _check_unit(value, name: str):
    if type(value) is float and 0.0 <= value <= 1.0:
        return value
    if isinstance(value, (float, int, np.floating, np.integer)):
        v = float(value)
        if not (-ATOL <= v <= 1 + ATOL):
            raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
        return min(max(v, 0.0), 1.0)
    arr = np.asarray(value, dtype=float)
    if np.any(arr < -ATOL) or np.any(arr > 1 + ATOL) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    if arr.ndim == 0:
        return min(max(float(arr), 0.0), 1.0)
    return np.clip(arr, 0.0, 1.0)


def _check_interval(a: float, b: float) -> tuple[float, float]:
    a = _check_unit(a, "a")
    b = _check_unit(b, "b")
    if a > b + ATOL:
        raise IntervalError(f"interval lower end {a} exceeds upper end {b}")
    return a, max(a, b)


def _unwrap(value):
    arr = np.asarray(value)
    return float(arr) if arr.ndim == 0 else arr


def _below_one(delta: float) -> float:
    # the exact composed delta is < 1; rounding can land on 1.0
    return min(delta, math.nextafter(1.0, 0.0))


def compose_pac(eps: float, delta: float, d: int) -> PrivacyParams:
    """Combine ``d`` independent (eps, delta)-PAC LDP mechanisms.

    The failure probabilities compose as ``1 - (1 - delta)**d``, which is
    never larger than the additive ``d * delta``.
    """
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension count must be a positive integer, got {d}")
    d = int(d)
    if not (0.0 <= delta < 1.0):
        raise ParameterError(f"delta must lie in [0, 1), got {delta}")
    composed_delta = 0.0 if delta == 0 else -math.expm1(d * math.log1p(-delta))
    return PrivacyParams(d * eps, _below_one(composed_delta))


def compose_heterogeneous(params: list[PrivacyParams]) -> PrivacyParams:
    """Same composition rule for per-dimension budgets that differ."""
    if not params:
        raise ParameterError("at least one mechanism is required")
    eps = math.fsum(p.epsilon for p in params)
    log_keep = math.fsum(math.log1p(-p.delta) for p in params)
    return PrivacyParams(eps, _below_one(0.0 - math.expm1(log_keep)))


def gaussian_sigma(eps: float, delta: float) -> float:
    """Noise scale of the PAC-calibrated Gaussian mechanism on [0, 1].

    Positive root of ``eps*s - 1/(2*s) = sqrt(-2 ln(delta/2))``.
    """
    eps = _check_epsilon(eps)
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    c2 = -2.0 * math.log(delta / 2.0)
    return (math.sqrt(c2) + math.sqrt(c2 + 2.0 * eps)) / (2.0 * eps)


def gaussian_sigma_log_form(eps: float, delta: float) -> float:
    """Equivalent ``sqrt(2)/2 * (sqrt(ln(2/delta) + eps) + sqrt(ln(2/delta))) / eps``."""
    eps = _check_epsilon(eps)
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    log_term = math.log(2.0 / delta)
    return math.sqrt(2.0) / 2.0 * (math.sqrt(log_term + eps) + math.sqrt(log_term)) / eps


def gaussian_privacy_loss(noise, sigma: float, shift: float = 1.0):
    """Privacy loss ``(2*noise*shift + shift**2) / (2*sigma**2)`` of Gaussian noise."""
    noise = np.asarray(noise, dtype=float)
    return _unwrap((2.0 * noise * shift + shift * shift) / (2.0 * sigma * sigma))


def gaussian_failure_probability(eps: float, sigma: float) -> float:
    """Exact ``Pr[|Z| >= eps*sigma - 1/(2*sigma)]`` for a standard normal Z."""
    t = eps * sigma - 1.0 / (2.0 * sigma)
    if t <= 0:
        return 1.0
    return float(math.erfc(t / math.sqrt(2.0)))


class Mechanism:
    """Common behaviour of all mechanism families.

    Subclasses implement ``pdf_at``, ``atoms``, ``cdf_at``, ``cdf_below``
    and ``sample_many``; interval probabilities are derived from the CDF.
    """

    family: ClassVar[str] = ""
    pure: ClassVar[bool] = True
    discrete: ClassVar[bool] = False

    @property
    def epsilon(self) -> float:
        return self.params.epsilon

    @property
    def delta(self) -> float:
        return self.params.delta

    @property
    def label(self) -> str:
        return self.family

    def pdf_at(self, x, t):
        raise NotImplementedError

    def atoms(self, x: float) -> list[tuple[float, float]]:
        return []

    def cdf_at(self, x: float, t: float) -> float:
        """Pr[M(x) <= t]."""
        raise NotImplementedError

    def cdf_below(self, x: float, t: float) -> float:
        """Pr[M(x) < t]."""
        raise NotImplementedError

    def sample_many(self, x: float, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, x: float, rng: np.random.Generator) -> float:
        return float(self.sample_many(x, rng, 1)[0])

    def snap_distance(self, x: float) -> float:
        return 0.0

    def interval_probability(self, x: float, a: float, b: float) -> IntervalProbability:
        x = _check_unit(x, "x")
        a, b = _check_interval(a, b)
        value = self.cdf_at(x, b) - self.cdf_below(x, a)
        value = min(max(value, 0.0), 1.0)
        left = right = False
        for loc, mass in self.atoms(x):
            if mass <= 0:
                continue
            left |= loc <= ATOL and a <= ATOL
            right |= loc >= 1 - ATOL and b >= 1 - ATOL
        return IntervalProbability(value, left, right)

    def concentration(self, x: float, theta: float) -> float:
        """Probability that M(x) lands in ``[x - theta, x + theta]`` clipped to [0, 1]."""
        x = _check_unit(x, "x")
        if theta < 0:
            raise ParameterError(f"theta must be non-negative, got {theta}")
        return self.interval_probability(x, max(0.0, x - theta), min(1.0, x + theta)).value


# --------------------------------------------------------------------------
# noise-adding mechanisms, clamped to [0, 1]


class _ClampedNoise(Mechanism):
    def _noise_cdf(self, z):
        raise NotImplementedError

    def _noise_pdf(self, z):
        raise NotImplementedError

    def _noise(self, rng, size):
        raise NotImplementedError

    def pdf_at(self, x, t):
        x = _check_unit(x, "x")
        t = _check_unit(t, "t")
        return _unwrap(self._noise_pdf(np.asarray(t) - np.asarray(x)))

    def atom_masses(self, x: float) -> tuple[float, float]:
        """Clamped mass at 0 and at 1."""
        x = _check_unit(x, "x")
        return float(self._noise_cdf(-x)), float(self._noise_cdf(-(1.0 - x)))

    def atoms(self, x):
        low, high = self.atom_masses(x)
        return [(0.0, low), (1.0, high)]

    def cdf_at(self, x, t):
        if t >= 1.0 - ATOL:
            return 1.0
        return float(self._noise_cdf(t - x))

    def cdf_below(self, x, t):
        if t <= ATOL:
            return 0.0
        return float(self._noise_cdf(t - x))

    def interval_probability(self, x, a, b):
        x = _check_unit(x, "x")
        a, b = _check_interval(a, b)
        if not (ATOL < a and b < 1 - ATOL):
            return super().interval_probability(x, a, b)
        lo, hi = a - x, b - x
        if lo > 0:
            # both ends right of x: difference of upper tails avoids cancellation
            value = float(self._noise_cdf(-lo) - self._noise_cdf(-hi))
        else:
            value = float(self._noise_cdf(hi) - self._noise_cdf(lo))
        return IntervalProbability(min(max(value, 0.0), 1.0))

    def sample_many(self, x, rng, size):
        x = _check_unit(x, "x")
        return np.clip(x + self._noise(rng, size), 0.0, 1.0)


@dataclass(frozen=True)
class LaplaceMechanism(_ClampedNoise):
    """x + Lap(1/eps), clamped to [0, 1]."""

    params: PrivacyParams
    family: ClassVar[str] = "laplace"

    @property
    def scale(self) -> float:
        return 1.0 / self.params.epsilon

    def _noise_cdf(self, z):
        eps = self.params.epsilon
        if isinstance(z, float):
            half = 0.5 * math.exp(-eps * abs(z))
            return half if z < 0 else 1.0 - half
        z = np.asarray(z, dtype=float)
        half = 0.5 * np.exp(-eps * np.abs(z))
        return _unwrap(np.where(z < 0, half, 1.0 - half))

    def _noise_pdf(self, z):
        eps = self.params.epsilon
        return 0.5 * eps * np.exp(-eps * np.abs(z))

    def _noise(self, rng, size):
        return rng.laplace(0.0, self.scale, size)


@dataclass(frozen=True)
class GaussianMechanism(_ClampedNoise):
    """x + N(0, sigma^2) with the PAC-calibrated sigma, clamped to [0, 1]."""

    params: PrivacyParams
    sigma: float = field(init=False)
    family: ClassVar[str] = "gaussian"
    pure: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "sigma", gaussian_sigma(self.params.epsilon, self.params.delta))

    def _noise_cdf(self, z):
        if isinstance(z, float):
            return 0.5 * math.erfc(-z / (self.sigma * math.sqrt(2.0)))
        return _unwrap(ndtr(np.asarray(z, dtype=float) / self.sigma))

    def _noise_pdf(self, z):
        z = np.asarray(z, dtype=float) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def _noise(self, rng, size):
        return rng.normal(0.0, self.sigma, size)


# --------------------------------------------------------------------------
# piecewise-constant mechanisms (PM, SW) normalised to [0, 1] -> [0, 1]


class _Piecewise(Mechanism):
    high: float
    half_width: float

    @property
    def low(self) -> float:
        return self.high / math.exp(self.params.epsilon)

    def window(self, x):
        """High-density window [l, r] around x (edge-clamped, width 2C)."""
        c = self.half_width
        x = np.asarray(x, dtype=float)
        left = np.where(x < c, 0.0, np.where(x <= 1.0 - c, x - c, 1.0 - 2.0 * c))
        right = left + 2.0 * c
        return _unwrap(left), _unwrap(right)

    def pdf_at(self, x, t):
        x = _check_unit(x, "x")
        t = _check_unit(t, "t")
        left, right = self.window(x)
        inside = (np.asarray(t) >= np.asarray(left) - ATOL) & (np.asarray(t) <= np.asarray(right) + ATOL)
        return _unwrap(np.where(inside, self.high, self.low))

    def _mass_upto(self, x, t):
        left, right = self.window(x)
        overlap = max(0.0, min(t, right) - left)
        return self.low * t + (self.high - self.low) * overlap

    # no atoms, so endpoints are taken literally
    def cdf_at(self, x, t):
        if t >= 1.0:
            return 1.0
        return min(self._mass_upto(x, t), 1.0)

    def cdf_below(self, x, t):
        return self.cdf_at(x, t)

    def interval_probability(self, x, a, b):
        x = _check_unit(x, "x")
        a, b = _check_interval(a, b)
        if a == 0.0 and b == 1.0:
            return IntervalProbability(1.0)
        left, right = self.window(x)
        inside = max(0.0, min(b, right) - max(a, left))
        value = self.high * inside + self.low * ((b - a) - inside)
        return IntervalProbability(min(max(value, 0.0), 1.0))

    def sample_many(self, x, rng, size):
        x = _check_unit(x, "x")
        left, right = self.window(x)
        width = right - left
        pick_high = rng.random(size) < self.high * width
        u = rng.random(size)
        high_draw = left + width * u
        s = u * (1.0 - width)
        low_draw = np.where(s < left, s, s + width)
        return np.where(pick_high, high_draw, low_draw)


@dataclass(frozen=True)
class PiecewiseMechanism(_Piecewise):
    """PM with high density e^(eps/2) on a window of width 1/(e^(eps/2) + 1)."""

    params: PrivacyParams
    family: ClassVar[str] = "pm"

    @property
    def high(self) -> float:
        return math.exp(self.params.epsilon / 2.0)

    @property
    def half_width(self) -> float:
        # (e^(eps/2) - 1) / (2e^eps - 2) simplified
        return 0.5 / (math.exp(self.params.epsilon / 2.0) + 1.0)


@dataclass(frozen=True)
class SquareWaveMechanism(_Piecewise):
    """SW with high density (e^eps - 1)/eps."""

    params: PrivacyParams
    family: ClassVar[str] = "sw"

    @property
    def high(self) -> float:
        eps = self.params.epsilon
        return math.expm1(eps) / eps

    @property
    def half_width(self) -> float:
        eps = self.params.epsilon
        if eps < 1e-2:
            # e^eps (eps - 1) + 1 = sum_n eps^n (n - 1) / n!
            num = sum(eps**n * (n - 1) / math.factorial(n) for n in range(2, 12))
            return num / (2.0 * math.expm1(eps) ** 2)
        inv = math.exp(-eps)
        return (eps - 1.0 + inv) * inv / (2.0 * (-math.expm1(-eps)) ** 2)


# --------------------------------------------------------------------------
# discrete mechanisms on the grid {i / (k - 1)}


@lru_cache(maxsize=4096)
def _krr_row(eps: float, k: int, j: int) -> np.ndarray:
    e = math.exp(eps)
    row = np.full(k, 1.0 / (k - 1 + e))
    row[j] = e / (k - 1 + e)
    row.setflags(write=False)
    return row


@lru_cache(maxsize=4096)
def _exponential_row(eps: float, k: int, j: int, sensitivity: float) -> np.ndarray:
    grid = np.arange(k) / (k - 1)
    logits = -eps * np.abs(grid - grid[j]) / (2.0 * sensitivity)
    weights = np.exp(logits - logits.max())
    row = weights / weights.sum()
    row.setflags(write=False)
    return row


@lru_cache(maxsize=4096)
def _prefix(row_key) -> np.ndarray:
    """Prefix sums of a mass row with a leading zero (length k + 1)."""
    fn, args = row_key
    cum = np.concatenate(([0.0], np.cumsum(fn(*args))))
    cum.setflags(write=False)
    return cum


class _Discrete(Mechanism):
    discrete: ClassVar[bool] = True
    params: PrivacyParams
    k: int

    def _validate_grid(self):
        if int(self.k) != self.k or self.k < 2:
            raise ParameterError(f"grid size k must be an integer >= 2, got {self.k}")

    @property
    def domain_size(self) -> int:
        return self.k

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.k) / (self.k - 1)

    def snap_index(self, x: float) -> int:
        x = _check_unit(x, "x")
        return int(math.floor(x * (self.k - 1) + 0.5))

    def snap(self, x: float) -> float:
        return self.snap_index(x) / (self.k - 1)

    def snap_distance(self, x: float) -> float:
        return abs(self.snap(x) - _check_unit(x, "x"))

    def _row_key(self, j: int):
        raise NotImplementedError

    def masses(self, x: float) -> np.ndarray:
        """Probability of each grid point given input x (after snapping)."""
        fn, args = self._row_key(self.snap_index(x))
        return fn(*args)

    def _prefix(self, x: float) -> np.ndarray:
        return _prefix(self._row_key(self.snap_index(x)))

    def pdf_at(self, x, t):
        x = _check_unit(x, "x")
        t = np.asarray(_check_unit(t, "t"), dtype=float)
        row = self.masses(x)
        pos = t * (self.k - 1)
        idx = np.clip(np.rint(pos).astype(int), 0, self.k - 1)
        on_grid = np.abs(idx / (self.k - 1) - t) <= ATOL
        return _unwrap(np.where(on_grid, row[idx], 0.0))

    def atoms(self, x):
        return list(zip(self.grid.tolist(), self.masses(x).tolist()))

    def _index_range(self, a: float, b: float) -> tuple[int, int]:
        lo = int(math.ceil((a - ATOL) * (self.k - 1)))
        hi = int(math.floor((b + ATOL) * (self.k - 1)))
        return max(lo, 0), min(hi, self.k - 1)

    def cdf_at(self, x, t):
        if t >= 1.0 - ATOL:
            return 1.0
        _, hi = self._index_range(0.0, t)
        return float(self._prefix(x)[hi + 1])

    def cdf_below(self, x, t):
        lo, _ = self._index_range(t, 1.0)
        return float(self._prefix(x)[lo])

    def interval_probability(self, x, a, b):
        x = _check_unit(x, "x")
        a, b = _check_interval(a, b)
        if a <= ATOL and b >= 1 - ATOL:
            return IntervalProbability(1.0, True, True)
        lo, hi = self._index_range(a, b)
        prefix = _prefix(self._row_key(int(math.floor(x * (self.k - 1) + 0.5))))
        value = float(prefix[hi + 1] - prefix[lo]) if lo <= hi else 0.0
        return IntervalProbability(min(value, 1.0), lo == 0 and lo <= hi, hi == self.k - 1 and lo <= hi)

    def sample_many(self, x, rng, size):
        cum = self._prefix(x)[1:]
        idx = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
        return np.minimum(idx, self.k - 1) / (self.k - 1)


@dataclass(frozen=True)
class KRRMechanism(_Discrete):
    """k-ary randomized response: keep the snapped value w.p. e^eps/(k-1+e^eps)."""

    params: PrivacyParams
    k: int = DEFAULT_GRID
    family: ClassVar[str] = "krr"

    def __post_init__(self):
        self._validate_grid()

    def _row_key(self, j):
        return _krr_row, (self.params.epsilon, int(self.k), j)


@dataclass(frozen=True)
class ExponentialMechanism(_Discrete):
    """Exponential mechanism scoring grid points by negative distance (sensitivity 1)."""

    params: PrivacyParams
    k: int = DEFAULT_GRID
    sensitivity: float = 1.0
    family: ClassVar[str] = "exponential"

    def __post_init__(self):
        self._validate_grid()

    def _row_key(self, j):
        return _exponential_row, (self.params.epsilon, int(self.k), j, float(self.sensitivity))


# --------------------------------------------------------------------------
# privacy indicator


@dataclass(frozen=True)
class IndicatorMechanism(Mechanism):
    """Release the true value w.p. delta, the inner pure-LDP output otherwise."""

    inner: Mechanism
    indicator_delta: float
    pure: ClassVar[bool] = False

    def __post_init__(self):
        if isinstance(self.inner, IndicatorMechanism) or not self.inner.pure:
            raise CompositionError("privacy indicator requires a pure-LDP inner mechanism")
        if not (0.0 < self.indicator_delta < 1.0):
            raise ParameterError(f"indicator delta must lie in (0, 1), got {self.indicator_delta}")

    @property
    def family(self) -> str:  # type: ignore[override]
        return self.inner.family

    @property
    def discrete(self) -> bool:  # type: ignore[override]
        return self.inner.discrete

    @property
    def params(self) -> PrivacyParams:
        return PrivacyParams(self.inner.epsilon, self.indicator_delta)

    @property
    def label(self) -> str:
        return f"ind-{self.inner.family}"

    def snap_distance(self, x):
        return self.inner.snap_distance(x)

    def pdf_at(self, x, t):
        keep = 1.0 - self.indicator_delta
        base = np.asarray(self.inner.pdf_at(x, t)) * keep
        if self.inner.discrete:
            t_arr = np.asarray(_check_unit(t, "t"))
            base = base + self.indicator_delta * (np.abs(t_arr - _check_unit(x, "x")) <= ATOL)
        return _unwrap(base)

    def atoms(self, x):
        x = _check_unit(x, "x")
        keep = 1.0 - self.indicator_delta
        merged: dict[float, float] = {}
        for loc, mass in self.inner.atoms(x):
            merged[loc] = merged.get(loc, 0.0) + keep * mass
        merged[x] = merged.get(x, 0.0) + self.indicator_delta
        return sorted(merged.items())

    def cdf_at(self, x, t):
        hit = self.indicator_delta if x <= t + ATOL else 0.0
        return hit + (1.0 - self.indicator_delta) * self.inner.cdf_at(x, t)

    def cdf_below(self, x, t):
        hit = self.indicator_delta if x < t - ATOL else 0.0
        return hit + (1.0 - self.indicator_delta) * self.inner.cdf_below(x, t)

    def interval_probability(self, x, a, b):
        x = _check_unit(x, "x")
        inner = self.inner.interval_probability(x, a, b)
        hit = 1.0 if a - ATOL <= x <= b + ATOL else 0.0
        value = self.indicator_delta * hit + (1.0 - self.indicator_delta) * inner.value
        return IntervalProbability(value, inner.includes_left_atom, inner.includes_right_atom)

    def sample_many(self, x, rng, size):
        x = _check_unit(x, "x")
        reveal = rng.random(size) < self.indicator_delta
        return np.where(reveal, x, self.inner.sample_many(x, rng, size))


# --------------------------------------------------------------------------
# constructors


def make_laplace(eps: float) -> LaplaceMechanism:
    return LaplaceMechanism(PrivacyParams(_check_epsilon(eps)))


def make_gaussian(eps: float, delta: float) -> GaussianMechanism:
    gaussian_sigma(eps, delta)
    return GaussianMechanism(PrivacyParams(_check_epsilon(eps), delta))


def make_pm(eps: float) -> PiecewiseMechanism:
    return PiecewiseMechanism(PrivacyParams(_check_epsilon(eps)))


def make_sw(eps: float) -> SquareWaveMechanism:
    return SquareWaveMechanism(PrivacyParams(_check_epsilon(eps)))


def make_krr(eps: float, k: int = DEFAULT_GRID) -> KRRMechanism:
    return KRRMechanism(PrivacyParams(_check_epsilon(eps)), k)


def make_exponential(eps: float, k: int = DEFAULT_GRID) -> ExponentialMechanism:
    return ExponentialMechanism(PrivacyParams(_check_epsilon(eps)), k)


def wrap_indicator(mech: Mechanism, delta: float) -> IndicatorMechanism:
    return IndicatorMechanism(mech, float(delta))


def make_mechanism(family: str, eps: float, delta: float = 0.0, k: int = DEFAULT_GRID) -> Mechanism:
    """Build a mechanism by family name.

    A positive ``delta`` on a pure family wraps it in the privacy
    indicator; for ``gaussian`` it is the PAC failure probability.
    """
    family = family.lower()
    if family == "gaussian":
        return make_gaussian(eps, delta)
    builders = {
        "laplace": lambda: make_laplace(eps),
        "pm": lambda: make_pm(eps),
        "sw": lambda: make_sw(eps),
        "krr": lambda: make_krr(eps, k),
        "exponential": lambda: make_exponential(eps, k),
    }
    if family not in builders:
        raise ParameterError(f"unknown mechanism family {family!r}; expected one of {', '.join(FAMILIES)}")
    mech = builders[family]()
    if delta:
        mech = wrap_indicator(mech, delta)
    return mech
