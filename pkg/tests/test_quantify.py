import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldpu.classifiers import fixture_nn_2d
from ldpu.errors import (
    DimensionError,
    DomainError,
    InfeasibleError,
    ParameterError,
    UnsupportedConfigurationError,
)
from ldpu.mechanisms import FAMILIES, PURE_FAMILIES, make_gaussian, make_laplace, make_mechanism, make_pm
from ldpu.quantify import DEFAULT_SWEEP_EPS, UtilityQuery, rho, rho_for_family, select_epsilon, sweep
from ldpu.robustness import Hyperrectangle

BOX_1D = Hyperrectangle((0.2,), (0.8,))


def test_step_laplace_rho():
    report = rho(UtilityQuery((0.5,), {0: make_laplace(2)}, BOX_1D))
    assert report.rho == pytest.approx(1 - math.exp(-0.6), abs=1e-15)
    assert report.composed_privacy.epsilon == 2 and report.composed_privacy.delta == 0


@pytest.mark.parametrize("family", ["pm", "sw", "krr", "exponential", "laplace", "gaussian"])
def test_full_domain_is_one(family):
    mech = make_mechanism(family, 1.5, 0.1 if family == "gaussian" else 0.0)
    report = rho(UtilityQuery((0.3, 0.7), {0: mech, 1: mech}, Hyperrectangle.unit(2)))
    assert report.rho == pytest.approx(1.0, abs=1e-15)


def test_joint_indicator():
    inner = 1 - math.exp(-0.6)
    report = rho(UtilityQuery((0.5,), {0: make_laplace(2)}, BOX_1D, joint_delta=0.1))
    assert report.rho == pytest.approx(0.1 + 0.9 * inner, abs=1e-15)
    assert report.rho > inner
    assert round(report.rho, 4) == 0.5061
    assert report.composed_privacy.delta == 0.1


def test_per_dimension_indicator_composes():
    wrapped = make_mechanism("pm", 2, 0.1)
    report = rho(UtilityQuery((0.5, 0.5), {0: wrapped, 1: wrapped}, Hyperrectangle.ball((0.5, 0.5), 0.3)))
    single = wrapped.interval_probability(0.5, 0.2, 0.8).value
    assert report.rho == pytest.approx(single**2)
    assert report.composed_privacy.delta == pytest.approx(0.19)
    assert report.composed_privacy.epsilon == 4


def test_non_sensitive_dimension_contributes_one():
    box = Hyperrectangle((0.2, 0.4), (0.8, 0.45))
    report = rho(UtilityQuery((0.5, 0.42), {0: make_laplace(2)}, box))
    assert report.per_dim_probs == (pytest.approx(1 - math.exp(-0.6)),)
    assert report.sensitive_dims == (0,)


def test_slack_reported_both_ways():
    report = rho(UtilityQuery((0.5,), {0: make_pm(2)}, BOX_1D, omega=0.05, tau=0.02, include_slack=True))
    assert report.rho == pytest.approx(report.rho_without_slack * 0.95 * 0.98)
    assert report.rho_with_slack == report.rho
    off = rho(UtilityQuery((0.5,), {0: make_pm(2)}, BOX_1D, omega=0.05, tau=0.02))
    assert off.rho == report.rho_without_slack


def test_statement_text():
    report = rho(UtilityQuery((0.5, 0.5), {0: make_pm(2), 1: make_pm(2)}, Hyperrectangle.ball((0.5, 0.5), 0.3)))
    assert report.statement.startswith(f"With probability at least {report.rho:.4f}")
    assert "preserves the correct classification result" in report.statement
    assert "pure 4-LDP" in report.statement
    pac = rho(UtilityQuery((0.5,), {0: make_gaussian(2, 0.1)}, BOX_1D))
    assert "(2, 0.1)-PAC LDP" in pac.statement


def test_snap_distances_reported():
    report = rho(UtilityQuery((0.5,), {0: make_mechanism("krr", 2)}, BOX_1D))
    assert report.snap_distances == (pytest.approx(50 / 99 - 0.5),)


@settings(max_examples=150, deadline=None)
@given(
    family=st.sampled_from(FAMILIES),
    eps=st.floats(0.1, 8),
    x=st.tuples(st.floats(0, 1), st.floats(0, 1)),
    widths=st.tuples(st.floats(0, 0.6), st.floats(0, 0.6), st.floats(0, 0.6), st.floats(0, 0.6)),
    slack=st.booleans(),
)
def test_rho_is_product_of_reported_parts(family, eps, x, widths, slack):
    lower = tuple(max(0.0, xi - w) for xi, w in zip(x, widths[:2]))
    upper = tuple(min(1.0, xi + w) for xi, w in zip(x, widths[2:]))
    mech = make_mechanism(family, eps, 0.1 if family == "gaussian" else 0.0)
    report = rho(UtilityQuery(x, {0: mech, 1: mech}, Hyperrectangle(lower, upper), include_slack=slack))
    assert 0.0 <= report.rho <= 1.0
    factor = (0.95 * 0.99) if slack else 1.0
    assert report.rho == pytest.approx(math.prod(report.per_dim_probs) * factor, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(
    family=st.sampled_from(FAMILIES),
    eps=st.floats(0.1, 8),
    theta=st.floats(0.0, 0.5),
    grow=st.tuples(st.floats(0, 0.5), st.floats(0, 0.5)),
)
def test_refinement_never_hurts(family, eps, theta, grow):
    x = (0.5,)
    small = Hyperrectangle.ball(x, theta)
    big = Hyperrectangle((max(0.0, small.lower[0] - grow[0]),), (min(1.0, small.upper[0] + grow[1]),))
    a = rho_for_family(family, eps, x, small, delta=0.1 if family == "gaussian" else 0.0).rho
    b = rho_for_family(family, eps, x, big, delta=0.1 if family == "gaussian" else 0.0).rho
    assert b >= a - 1e-12


@settings(max_examples=100, deadline=None)
@given(family=st.sampled_from(PURE_FAMILIES), eps=st.floats(0.1, 8), delta=st.floats(1e-6, 0.999))
def test_indicator_refinement_not_worse(family, eps, delta):
    base = rho_for_family(family, eps, (0.5,), BOX_1D).rho
    joint = rho_for_family(family, eps, (0.5,), BOX_1D, joint_delta=delta).rho
    assert joint == delta + (1 - delta) * base
    assert joint >= base


def test_query_errors():
    mech = make_laplace(1)
    with pytest.raises(DomainError):
        rho(UtilityQuery((0.9,), {0: mech}, BOX_1D))
    with pytest.raises(DimensionError):
        rho(UtilityQuery((0.5,), {1: mech}, BOX_1D))
    with pytest.raises(DimensionError):
        rho(UtilityQuery((0.5,), {}, BOX_1D))
    with pytest.raises(DimensionError):
        rho(UtilityQuery((0.5, 0.5), {0: mech}, BOX_1D))
    with pytest.raises(DimensionError):
        rho(UtilityQuery((0.5,), {0: mech}, BOX_1D, model=fixture_nn_2d()))
    with pytest.raises(ParameterError):
        rho(UtilityQuery((0.5,), {0: make_gaussian(1, 0.1)}, BOX_1D, joint_delta=0.1))


# ---------------------------------------------------------------- epsilon selection


def test_select_epsilon_laplace_closed_form():
    eps = select_epsilon(0.8, "laplace", (0.5,), BOX_1D)
    assert eps == pytest.approx(math.log(5) / 0.3, abs=0.005)
    assert rho_for_family("laplace", eps, (0.5,), BOX_1D).rho >= 0.8
    assert rho_for_family("laplace", eps - 1e-3, (0.5,), BOX_1D).rho < 0.8


def test_select_epsilon_zero_target():
    assert select_epsilon(0.0, "laplace", (0.5,), BOX_1D) == 0.01
    assert select_epsilon(0.0, "pm", (0.5,), BOX_1D, eps_range=(0.3, 4)) == 0.3


def test_select_epsilon_pm_against_grid_scan():
    eps = select_epsilon(0.8, "pm", (0.5,), BOX_1D)
    grid = np.arange(0.01, 5, 1e-4)
    first = next(e for e in grid if rho_for_family("pm", float(e), (0.5,), BOX_1D).rho >= 0.8)
    assert abs(eps - first) <= 1e-3 + 1e-4


@pytest.mark.parametrize("family", ["laplace", "pm", "sw", "exponential"])
@pytest.mark.parametrize("target", [0.3, 0.6, 0.9])
def test_select_epsilon_is_minimal(family, target):
    eps = select_epsilon(target, family, (0.5,), BOX_1D)
    assert rho_for_family(family, eps, (0.5,), BOX_1D).rho >= target
    if eps > 0.01:
        assert rho_for_family(family, eps - 1e-3, (0.5,), BOX_1D).rho < target


def test_select_epsilon_infeasible():
    with pytest.raises(InfeasibleError, match="not reachable"):
        select_epsilon(0.99, "laplace", (0.5,), BOX_1D, eps_range=(0.01, 2))


def test_select_epsilon_non_monotone_rejected():
    # [0, 0.5] holds x = 0.5 but not its grid point 50/99, so k-RR mass there shrinks with eps
    with pytest.raises(UnsupportedConfigurationError, match="not monotone"):
        select_epsilon(0.5, "krr", (0.5,), Hyperrectangle((0.0,), (0.5,)))


@pytest.mark.parametrize("bad", [(-0.1,), (1.1,)])
def test_select_epsilon_bad_target(bad):
    with pytest.raises(ParameterError):
        select_epsilon(bad[0], "laplace", (0.5,), BOX_1D)


# ---------------------------------------------------------------- sweep


def test_sweep_ordering_at_eps_2():
    rows = {r.family: r.rho for r in sweep(FAMILIES, [2.0], [0.3])}
    assert rows["laplace"] < rows["krr"] < rows["pm"]
    assert rows["laplace"] == pytest.approx(0.4512, abs=5e-4)
    assert rows["pm"] == pytest.approx(0.8528, abs=5e-4)
    assert rows["krr"] == pytest.approx(0.6240, abs=5e-4)


@pytest.mark.parametrize("family", ["pm", "sw", "krr", "exponential", "laplace"])
def test_sweep_half_width_theta_gives_one(family):
    (row,) = sweep([family], [1.0], [0.5])
    assert row.rho == pytest.approx(1.0, abs=1e-15)


def test_best_family_on_default_grid():
    rows = sweep(FAMILIES, DEFAULT_SWEEP_EPS, [0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5])
    table = {(r.family, r.epsilon, r.theta_or_rect): r.rho for r in rows}
    for r in rows:
        if r.epsilon >= 2 and r.theta_or_rect != "0.1":
            if r.family == "pm":
                assert r.best, (r.epsilon, r.theta_or_rect)
    # at (2, 0.1) SW's taller window beats PM, as the closed forms show
    sw, pm = make_mechanism("sw", 2), make_mechanism("pm", 2)
    assert sw.concentration(0.5, 0.1) > pm.concentration(0.5, 0.1)
    assert table[("sw", 2.0, "0.1")] > table[("pm", 2.0, "0.1")]


def test_sweep_threads_match_sequential():
    a = sweep(FAMILIES, [0.5, 2], [0.1, 0.3])
    b = sweep(FAMILIES, [0.5, 2], [0.1, 0.3], workers=4)
    assert a == b


def test_sweep_with_box_and_record_columns():
    box = Hyperrectangle((0.0, 0.0), (0.9, 0.9))
    rows = sweep(["pm", "laplace"], [1.0], None, x=(0.5, 0.5), hyperrect=box)
    rec = rows[0].as_record()
    assert list(rec) == [
        "family", "epsilon", "theta_or_rect", "rho", "per_dim_probs", "composed_eps", "composed_delta", "best"
    ]
    assert rec["composed_eps"] == 2.0
    assert len(rec["per_dim_probs"]) == 2


def test_sweep_needs_grids():
    with pytest.raises(ParameterError):
        sweep([], [1.0], [0.1])
    with pytest.raises(ParameterError):
        sweep(["pm"], [1.0], None)
