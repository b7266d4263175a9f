"""Black-box probabilistic robustness via Hoeffding-sized sampling.

A region is accepted when the empirical misclassification rate over
``n(omega, tau/2)`` uniform samples is at most ``tau/2``; by Hoeffding the
true rate is then at most ``tau`` with probability ``1 - omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifiers import ClassifierModel
from .errors import DimensionError, DomainError, ParameterError

# substream tags so that radius search, expansion and final checks never share draws
_RADIUS, _EXPAND, _VERIFY = 1, 2, 3


@dataclass(frozen=True)
class RobustnessConfig:
    tau: float = 0.02
    omega: float = 0.05
    kappa: float = 0.01
    seed: int = 0
    max_expand_passes: int = 3

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ParameterError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0 < self.omega < 1:
            raise ParameterError(f"omega must lie in (0, 1), got {self.omega}")
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if self.max_expand_passes < 1:
            raise ParameterError("max_expand_passes must be at least 1")

    @property
    def samples(self) -> int:
        return hoeffding_sample_size(self.omega, self.tau / 2)


@dataclass(frozen=True)
class Hyperrectangle:
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise DimensionError("hyperrectangle needs matching, non-empty lower/upper bounds")
        for i, (a, b) in enumerate(zip(lower, upper)):
            if not (0.0 <= a <= b <= 1.0):
                raise DomainError(f"dimension {i}: interval [{a}, {b}] must satisfy 0 <= a <= b <= 1")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def ball(cls, x: Sequence[float], theta: float) -> "Hyperrectangle":
        """The l-inf ball of radius theta around x, clipped to the unit cube."""
        return cls(tuple(max(0.0, xi - theta) for xi in x), tuple(min(1.0, xi + theta) for xi in x))

    @classmethod
    def unit(cls, d: int) -> "Hyperrectangle":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lower, self.upper))

    def contains(self, point: Sequence[float], tol: float = 1e-12) -> bool:
        return len(point) == self.dimension and all(
            a - tol <= p <= b + tol for p, a, b in zip(point, self.lower, self.upper)
        )

    def contains_rect(self, other: "Hyperrectangle", tol: float = 1e-12) -> bool:
        return all(
            a - tol <= oa and ob <= b + tol
            for a, b, oa, ob in zip(self.lower, self.upper, other.lower, other.upper)
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        lo = np.array(self.lower)
        hi = np.array(self.upper)
        return lo + (hi - lo) * rng.random((n, self.dimension))

    def __str__(self) -> str:
        return " x ".join(f"[{a:.4g}, {b:.4g}]" for a, b in self.intervals)


@dataclass(frozen=True)
class RobustnessVerdict:
    accepted: bool
    misclass_rate: float
    samples_used: int


def hoeffding_sample_size(omega: float, tau: float) -> int:
    """Smallest n with ``2 exp(-2 n tau^2) <= omega``."""
    if not 0 < omega < 1:
        raise ParameterError(f"omega must lie in (0, 1), got {omega}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    return math.ceil(math.log(2.0 / omega) / (2.0 * tau * tau))


def substream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *tags])


def _anchor(model: ClassifierModel, x) -> tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.dimension:
        raise DimensionError(f"model expects {model.dimension}-dimensional points, got {x.shape[0]}")
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError(f"anchor point {x.tolist()} must lie in [0, 1]^d")
    return x, model.predict(x).label


def test_region(
    model: ClassifierModel,
    x,
    region: Hyperrectangle,
    config: RobustnessConfig,
    rng: np.random.Generator | None = None,
) -> RobustnessVerdict:
    """Hoeffding test that the label of x holds on (almost all of) the region."""
    x, label = _anchor(model, x)
    if not region.contains(x.tolist()):
        raise DomainError(f"anchor {x.tolist()} lies outside region {region}")
    if rng is None:
        rng = substream(config.seed, _VERIFY)
    n = config.samples
    points = region.sample(rng, n)
    wrong = int(np.count_nonzero(model.predict_batch(points) != label))
    rate = wrong / n
    return RobustnessVerdict(rate <= config.tau / 2, rate, n)


test_region.__test__ = False  # not a pytest test


def find_radius(model: ClassifierModel, x, config: RobustnessConfig) -> float:
    """Largest accepted l-inf radius, found by bisection on [0, 1] to precision kappa."""
    x, _ = _anchor(model, x)
    trial = 0

    def accepted(theta: float) -> bool:
        nonlocal trial
        trial += 1
        rng = substream(config.seed, _RADIUS, trial)
        return test_region(model, x, Hyperrectangle.ball(x, theta), config, rng).accepted

    if accepted(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > config.kappa:
        mid = 0.5 * (lo + hi)
        if accepted(mid):
            lo = mid
        else:
            hi = mid
    return lo


def expand_hyperrectangle(model: ClassifierModel, x, theta: float, config: RobustnessConfig) -> Hyperrectangle:
    """Grow the theta-box face by face while the enlarged box stays accepted.

    Faces are visited in dimension order, lower before upper.  Each face
    starts with step ``4 * kappa``; a rejected step is halved until it
    drops below kappa.  The result is re-tested on a fresh substream and
    shrunk back towards the theta-box if that final check fails.
    """
    x, _ = _anchor(model, x)
    box = Hyperrectangle.ball(x, theta)
    lower, upper = list(box.lower), list(box.upper)
    trial = 0

    def accepted(lo, up, tag=_EXPAND) -> bool:
        nonlocal trial
        trial += 1
        rng = substream(config.seed, tag, trial)
        return test_region(model, x, Hyperrectangle(tuple(lo), tuple(up)), config, rng).accepted

    d = len(x)
    for _ in range(config.max_expand_passes):
        grew = False
        for i in range(d):
            for side in (0, 1):
                step = 4 * config.kappa
                while step >= config.kappa:
                    lo, up = lower[:], upper[:]
                    if side == 0:
                        if lower[i] <= 0.0:
                            break
                        lo[i] = max(0.0, lower[i] - step)
                    else:
                        if upper[i] >= 1.0:
                            break
                        up[i] = min(1.0, upper[i] + step)
                    if accepted(lo, up):
                        lower, upper = lo, up
                        grew = True
                    else:
                        step /= 2
        if not grew:
            break

    return _verified(box, lower, upper, accepted, config.kappa)


def _verified(base: Hyperrectangle, lower, upper, accepted, kappa: float) -> Hyperrectangle:
    """Pull faces back towards ``base`` until a fresh test accepts the box."""
    if accepted(lower, upper, _VERIFY):
        return Hyperrectangle(tuple(lower), tuple(upper))
    faces = [(i, side) for i in reversed(range(len(lower))) for side in (1, 0)]
    while lower != list(base.lower) or upper != list(base.upper):
        for i, side in faces:
            lo, up = lower[:], upper[:]
            if side == 0:
                lo[i] = min(base.lower[i], lower[i] + kappa) if lower[i] < base.lower[i] else lower[i]
            else:
                up[i] = max(base.upper[i], upper[i] - kappa) if upper[i] > base.upper[i] else upper[i]
            if (lo, up) != (lower, upper) and accepted(lo, up, _VERIFY):
                return Hyperrectangle(tuple(lo), tuple(up))
        lower = [min(b, v + kappa) for v, b in zip(lower, base.lower)]
        upper = [max(b, v - kappa) for v, b in zip(upper, base.upper)]
        if accepted(lower, upper, _VERIFY):
            break
    return Hyperrectangle(tuple(lower), tuple(upper))


def boundary_oracle_2d(model: ClassifierModel, resolution: float = 0.001) -> set[tuple[int, int]]:
    """Grid cells of the unit square whose four corners do not share one label.

    Cell ``(i, j)`` spans ``[i*res, (i+1)*res] x [j*res, (j+1)*res]``.
    """
    if model.dimension != 2:
        raise DimensionError(f"boundary oracle needs a 2-D model, got dimension {model.dimension}")
    m = int(round(1.0 / resolution))
    grid = np.arange(m + 1) / m
    labels = np.empty((m + 1, m + 1), dtype=np.int32)
    for i in range(m + 1):
        col = np.column_stack([np.full(m + 1, grid[i]), grid])
        labels[i] = model.predict_batch(col)
    c00, c10, c01, c11 = labels[:-1, :-1], labels[1:, :-1], labels[:-1, 1:], labels[1:, 1:]
    mixed = (c00 != c10) | (c00 != c01) | (c00 != c11)
    return {(int(i), int(j)) for i, j in zip(*np.nonzero(mixed))}


def oracle_linf_distance(cells: set[tuple[int, int]], x, resolution: float) -> float:
    """Smallest l-inf distance from x to any boundary cell (0 if x is inside one)."""
    if not cells:
        return math.inf
    idx = np.array(sorted(cells), dtype=float)
    lo = idx * resolution
    hi = lo + resolution
    x = np.asarray(x, dtype=float)
    gap = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return float(gap.max(axis=1).min())
