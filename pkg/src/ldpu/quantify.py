"""Theoretical utility: probability that the perturbed input keeps its label.

The guarantee multiplies, over the perturbed dimensions, the probability
that each mechanism lands inside the robust interval of that dimension.
Dimensions are 0-based throughout the library.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .classifiers import ClassifierModel
from .errors import DimensionError, DomainError, InfeasibleError, ParameterError, UnsupportedConfigurationError
from .mechanisms import (
    DEFAULT_GRID,
    FAMILIES,
    Mechanism,
    PrivacyParams,
    compose_heterogeneous,
    make_mechanism,
)
from .robustness import Hyperrectangle

DEFAULT_SWEEP_EPS = (0.5, 1.0, 2.0, 4.0, 6.0, 8.0)
DEFAULT_SWEEP_THETA = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
DEFAULT_GAUSSIAN_DELTA = 0.1


@dataclass(frozen=True)
class UtilityQuery:
    x: tuple[float, ...]
    mechanisms: Mapping[int, Mechanism]
    hyperrect: Hyperrectangle
    omega: float = 0.05
    tau: float = 0.01
    include_slack: bool = False
    joint_delta: float | None = None
    model: ClassifierModel | None = None

    @property
    def sensitive_dims(self) -> tuple[int, ...]:
        return tuple(sorted(self.mechanisms))


@dataclass(frozen=True)
class UtilityReport:
    rho: float
    per_dim_probs: tuple[float, ...]
    composed_privacy: PrivacyParams
    rho_without_slack: float
    rho_with_slack: float
    slack: float
    sensitive_dims: tuple[int, ...] = ()
    mechanisms: tuple[Mechanism, ...] = ()
    x: tuple[float, ...] = ()
    joint_delta: float | None = None

    @property
    def snap_distances(self) -> tuple[float, ...]:
        return tuple(m.snap_distance(self.x[i]) for i, m in zip(self.sensitive_dims, self.mechanisms))

    @property
    def statement(self) -> str:
        mech_text = ", ".join(
            f"{m.label}(eps={m.epsilon:g}) on x[{i}]" for i, m in zip(self.sensitive_dims, self.mechanisms)
        )
        if self.joint_delta is not None:
            mech_text += f" under a joint privacy indicator (delta={self.joint_delta:g})"
        return (
            f"With probability at least {self.rho:.4f}, the classifier preserves the correct classification "
            f"result under the perturbed input by {mech_text}, which guarantees "
            f"{_describe_privacy(self.composed_privacy)}."
        )


def _validate(query: UtilityQuery, intervals) -> None:
    if not query.mechanisms:
        raise DimensionError("at least one sensitive dimension needs a mechanism")
    d = len(query.x)
    if len(intervals) != d:
        raise DimensionError(f"hyperrectangle has {len(intervals)} dimensions, point has {d}")
    if query.model is not None and query.model.dimension != d:
        raise DimensionError(f"model expects {query.model.dimension} dimensions, point has {d}")
    for i in query.mechanisms:
        if not 0 <= i < d:
            raise DimensionError(f"mechanism assigned to dimension {i}, but the point has {d} dimensions")
        a, b = intervals[i]
        if not a - 1e-12 <= query.x[i] <= b + 1e-12:
            raise DomainError(f"x[{i}] = {query.x[i]} lies outside the robust interval [{a}, {b}]")
    if query.joint_delta is not None:
        if not 0 < query.joint_delta < 1:
            raise ParameterError(f"joint indicator delta must lie in (0, 1), got {query.joint_delta}")
        if not all(m.pure for m in query.mechanisms.values()):
            raise ParameterError("a joint privacy indicator needs pure-LDP mechanisms on every dimension")


def _describe_privacy(p: PrivacyParams) -> str:
    if p.delta == 0:
        return f"pure {p.epsilon:g}-LDP"
    return f"({p.epsilon:g}, {p.delta:.6g})-PAC LDP"


def rho(query: UtilityQuery) -> UtilityReport:
    intervals = query.hyperrect.intervals
    _validate(query, intervals)
    dims = query.sensitive_dims
    mechs = tuple(query.mechanisms[i] for i in dims)
    probs = tuple(m.interval_probability(query.x[i], *intervals[i]).value for i, m in zip(dims, mechs))
    inner = math.prod(probs)
    if query.joint_delta is not None:
        delta = query.joint_delta
        base = delta + (1.0 - delta) * inner
        privacy = PrivacyParams(math.fsum(m.epsilon for m in mechs), delta)
    else:
        base = inner
        privacy = compose_heterogeneous([m.params for m in mechs])
    slack = (1.0 - query.omega) * (1.0 - query.tau)
    return UtilityReport(
        rho=base * slack if query.include_slack else base,
        per_dim_probs=probs,
        composed_privacy=privacy,
        rho_without_slack=base,
        rho_with_slack=base * slack,
        slack=slack if query.include_slack else 1.0,
        sensitive_dims=dims,
        mechanisms=mechs,
        x=tuple(query.x),
        joint_delta=query.joint_delta,
    )


def rho_for_family(
    family: str,
    eps: float,
    x: Sequence[float],
    hyperrect: Hyperrectangle,
    sensitive_dims: Sequence[int] | None = None,
    delta: float = 0.0,
    k: int = DEFAULT_GRID,
    joint_delta: float | None = None,
    include_slack: bool = False,
) -> UtilityReport:
    """rho with the same mechanism family and budget on every sensitive dimension."""
    dims = range(len(x)) if sensitive_dims is None else sensitive_dims
    mechs = {i: make_mechanism(family, eps, delta, k) for i in dims}
    return rho(UtilityQuery(tuple(x), mechs, hyperrect, include_slack=include_slack, joint_delta=joint_delta))


def select_epsilon(
    target: float,
    family: str,
    x: Sequence[float],
    hyperrect: Hyperrectangle,
    eps_range: tuple[float, float] = (0.01, 20.0),
    delta: float = 0.0,
    k: int = DEFAULT_GRID,
    sensitive_dims: Sequence[int] | None = None,
    joint_delta: float | None = None,
    include_slack: bool = False,
    precision: float = 1e-3,
    probes: int = 16,
) -> float:
    """Smallest epsilon in ``eps_range`` whose rho reaches ``target``.

    rho must be non-decreasing in epsilon; this is checked on ``probes``
    evenly spaced points before bisecting.
    """
    if not 0 <= target <= 1:
        raise ParameterError(f"target must lie in [0, 1], got {target}")
    lo, hi = (float(v) for v in eps_range)
    if not 0 < lo < hi:
        raise ParameterError(f"eps_range must satisfy 0 < low < high, got {eps_range}")

    def f(eps: float) -> float:
        return rho_for_family(family, eps, x, hyperrect, sensitive_dims, delta, k, joint_delta, include_slack).rho

    grid = np.linspace(lo, hi, probes)
    values = [f(e) for e in grid]
    for e0, e1, v0, v1 in zip(grid, grid[1:], values, values[1:]):
        if v1 < v0 - 1e-12:
            raise UnsupportedConfigurationError(
                f"rho is not monotone in epsilon for {family}: rho({e0:.4g}) = {v0:.6g} > rho({e1:.4g}) = {v1:.6g}"
            )
    if values[0] >= target:
        return lo
    if values[-1] < target:
        raise InfeasibleError(
            f"target {target} is not reachable with {family} for epsilon <= {hi:g} (max rho {values[-1]:.6g})"
        )
    # tighten the bracket with the probes before bisecting
    j = next(i for i, v in enumerate(values) if v >= target)
    a, b = float(grid[j - 1]), float(grid[j])
    while b - a > precision:
        mid = 0.5 * (a + b)
        if f(mid) >= target:
            b = mid
        else:
            a = mid
    return b


@dataclass(frozen=True)
class SweepRow:
    family: str
    epsilon: float
    theta_or_rect: str
    rho: float
    per_dim_probs: tuple[float, ...]
    composed_eps: float
    composed_delta: float
    best: bool = False

    def as_record(self) -> dict:
        return {
            "family": self.family,
            "epsilon": self.epsilon,
            "theta_or_rect": self.theta_or_rect,
            "rho": self.rho,
            "per_dim_probs": list(self.per_dim_probs),
            "composed_eps": self.composed_eps,
            "composed_delta": self.composed_delta,
            "best": self.best,
        }


@dataclass(frozen=True)
class _Cell:
    family: str
    eps: float
    label: str
    region: Hyperrectangle


def sweep(
    families: Sequence[str] = FAMILIES,
    eps_grid: Sequence[float] = DEFAULT_SWEEP_EPS,
    thetas: Sequence[float] | None = DEFAULT_SWEEP_THETA,
    x: Sequence[float] = (0.5,),
    hyperrect: Hyperrectangle | None = None,
    gaussian_delta: float = DEFAULT_GAUSSIAN_DELTA,
    indicator_delta: float = 0.0,
    k: int = DEFAULT_GRID,
    workers: int = 1,
) -> list[SweepRow]:
    """rho for every (family, epsilon, region) cell.

    Regions are either l-inf balls of each theta around x or a single
    hyperrectangle.  ``best`` marks the families attaining the maximum
    rho of their (epsilon, region) cell.
    """
    if not families or not eps_grid:
        raise ParameterError("families and eps_grid must be non-empty")
    x = tuple(float(v) for v in x)
    if hyperrect is not None:
        regions = [(str(hyperrect), hyperrect)]
    else:
        if not thetas:
            raise ParameterError("give either thetas or a hyperrectangle")
        regions = [(f"{t:g}", Hyperrectangle.ball(x, t)) for t in thetas]
    cells = [_Cell(f, float(e), label, r) for f in families for e in eps_grid for label, r in regions]

    def evaluate(cell: _Cell) -> SweepRow:
        delta = gaussian_delta if cell.family == "gaussian" else indicator_delta
        rep = rho_for_family(cell.family, cell.eps, x, cell.region, delta=delta, k=k)
        return SweepRow(
            cell.family,
            cell.eps,
            cell.label,
            rep.rho,
            rep.per_dim_probs,
            rep.composed_privacy.epsilon,
            rep.composed_privacy.delta,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, cells))
    else:
        rows = [evaluate(c) for c in cells]

    best: dict[tuple[float, str], float] = {}
    for r in rows:
        key = (r.epsilon, r.theta_or_rect)
        best[key] = max(best.get(key, -1.0), r.rho)
    return [
        SweepRow(**{**r.__dict__, "best": r.rho >= best[(r.epsilon, r.theta_or_rect)] - 1e-12}) for r in rows
    ]
