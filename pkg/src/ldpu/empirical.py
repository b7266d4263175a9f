"""Monte-Carlo estimate of prediction preservation under actual perturbation."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classifiers import ClassifierModel
from .errors import DimensionError, ParameterError
from .mechanisms import DEFAULT_GRID, Mechanism, make_mechanism
from .quantify import DEFAULT_GAUSSIAN_DELTA, UtilityQuery, rho
from .robustness import Hyperrectangle

DEFAULT_SAMPLES = 2000
CONFIDENCE_OMEGA = 0.05


def hoeffding_halfwidth(n: int, omega: float = CONFIDENCE_OMEGA) -> float:
    return math.sqrt(math.log(2.0 / omega) / (2.0 * n))


@dataclass(frozen=True)
class EmpiricalEstimate:
    rho_hat: float
    n: int
    hoeffding_halfwidth: float
    elapsed_sampling: float
    elapsed_inference: float
    preserved: int = 0


def perturb(
    x: Sequence[float],
    mechanisms: Mapping[int, Mechanism],
    n: int,
    rng: np.random.Generator,
    joint_delta: float | None = None,
) -> np.ndarray:
    """``n`` perturbed copies of x; unlisted dimensions stay fixed."""
    base = np.asarray(x, dtype=float)
    out = np.tile(base, (n, 1))
    for i in sorted(mechanisms):
        out[:, i] = mechanisms[i].sample_many(base[i], rng, n)
    if joint_delta is not None:
        reveal = rng.random(n) < joint_delta
        out[reveal] = base
    return out


def empirical_rho(
    model: ClassifierModel,
    x: Sequence[float],
    mechanisms: Mapping[int, Mechanism],
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    joint_delta: float | None = None,
) -> EmpiricalEstimate:
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    x = tuple(float(v) for v in x)
    if len(x) != model.dimension:
        raise DimensionError(f"model expects {model.dimension}-dimensional points, got {len(x)}")
    for i in mechanisms:
        if not 0 <= i < len(x):
            raise DimensionError(f"mechanism assigned to dimension {i}, but the point has {len(x)} dimensions")
    label = model.predict(x).label
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    points = perturb(x, mechanisms, n, rng, joint_delta)
    t1 = time.perf_counter()
    preserved = int(np.count_nonzero(model.predict_batch(points) == label))
    t2 = time.perf_counter()
    return EmpiricalEstimate(preserved / n, n, hoeffding_halfwidth(n), t1 - t0, t2 - t1, preserved)


@dataclass(frozen=True)
class ComparisonRow:
    family: str
    epsilon: float
    theta_or_rect: str
    rho: float
    per_dim_probs: tuple[float, ...]
    composed_eps: float
    composed_delta: float
    rho_hat: float
    halfwidth: float
    violation: bool
    t_sample_ms: float
    t_infer_ms: float
    t_theory_ms: float

    def as_record(self) -> dict:
        rec = dict(self.__dict__)
        rec["per_dim_probs"] = list(self.per_dim_probs)
        return rec


def _median_ms(samples: list[float]) -> float:
    return statistics.median(samples) * 1e3


def compare(
    model: ClassifierModel,
    x: Sequence[float],
    families: Sequence[str],
    eps_grid: Sequence[float],
    hyperrect: Hyperrectangle,
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    sensitive_dims: Sequence[int] | None = None,
    gaussian_delta: float = DEFAULT_GAUSSIAN_DELTA,
    indicator_delta: float = 0.0,
    k: int = DEFAULT_GRID,
    repeats: int = 10,
) -> list[ComparisonRow]:
    """Theoretical rho next to the empirical estimate for each (family, epsilon).

    Timings are medians over ``repeats`` runs; each run rebuilds the
    mechanisms so both sides pay the same set-up cost.  An empty family
    list gives an empty table.
    """
    x = tuple(float(v) for v in x)
    dims = tuple(range(len(x)) if sensitive_dims is None else sensitive_dims)
    rows = []
    for family in families:
        delta = gaussian_delta if family == "gaussian" else indicator_delta
        for eps in eps_grid:
            theory_times, sample_times, infer_times = [], [], []
            report = estimate = None
            # each side runs as its own block so neither evicts the other's caches
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                mechs = {i: make_mechanism(family, eps, delta, k) for i in dims}
                report = rho(UtilityQuery(x, mechs, hyperrect))
                theory_times.append(time.perf_counter() - t0)
            for _ in range(max(1, repeats)):
                t0 = time.perf_counter()
                mechs = {i: make_mechanism(family, eps, delta, k) for i in dims}
                build = time.perf_counter() - t0
                estimate = empirical_rho(model, x, mechs, n, seed)
                sample_times.append(build + estimate.elapsed_sampling)
                infer_times.append(estimate.elapsed_inference)
            rows.append(
                ComparisonRow(
                    family=mechs[dims[0]].label,
                    epsilon=float(eps),
                    theta_or_rect=str(hyperrect),
                    rho=report.rho,
                    per_dim_probs=report.per_dim_probs,
                    composed_eps=report.composed_privacy.epsilon,
                    composed_delta=report.composed_privacy.delta,
                    rho_hat=estimate.rho_hat,
                    halfwidth=estimate.hoeffding_halfwidth,
                    violation=report.rho > estimate.rho_hat + estimate.hoeffding_halfwidth,
                    t_sample_ms=_median_ms(sample_times),
                    t_infer_ms=_median_ms(infer_times),
                    t_theory_ms=_median_ms(theory_times),
                )
            )
    return rows


def render_cost_table(rows: Sequence[ComparisonRow]) -> str:
    """Per-family median cost in milliseconds: theory vs sampling + inference."""
    by_family: dict[str, list[ComparisonRow]] = {}
    for r in rows:
        by_family.setdefault(r.family, []).append(r)
    lines = [f"{'mechanism':<16}{'theory (ms)':>14}{'empirical (ms)':>18}{'ratio':>10}"]
    for family, group in by_family.items():
        theory = statistics.median(r.t_theory_ms for r in group)
        empirical = statistics.median(r.t_sample_ms + r.t_infer_ms for r in group)
        ratio = empirical / theory if theory > 0 else math.inf
        lines.append(f"{family:<16}{theory:>14.4f}{empirical:>18.4f}{ratio:>10.1f}")
    return "\n".join(lines)
