import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from epsiplan.accuracy import (
    PrivacyLevel,
    StudyKind,
    StudySpec,
    failure_bound,
    mean_epsilon_window,
    mean_min_n,
    mwem_prefactor,
    mwem_pure_rate,
)
from epsiplan.economics import BudgetPolicy, CostProfile, marginal_cost
from epsiplan.feasibility import (
    GRID_ENV,
    BlatantParams,
    DeltaMode,
    DeltaSearch,
    FeasibilityProblem,
    Point,
    SideConstraints,
    Status,
    _eps_accuracy,
    _eps_budget,
    blatant_epsilon_ceiling,
    grid_points_from_env,
    group_privacy_floor,
    log_int_grid,
    region_export,
    solve,
    verify_point,
)

mp.mp.dps = 30
MEAN = StudySpec.mean(0.05, 0.05)
MWEM_PURE = StudySpec(StudyKind.MWEM_PURE, 0.2, 0.05, universe_size=2**8, query_count=10**4)
MWEM_APPROX = StudySpec(StudyKind.MWEM_APPROX, 0.05, 0.05, universe_size=2**15, query_count=200_000)


def mean_problem(E, W=0.0, total=3e4, **sides):
    return FeasibilityProblem(MEAN, CostProfile(E, W), BudgetPolicy(total=total), SideConstraints(**sides))


def edu_side_problem():
    return FeasibilityProblem(
        MEAN, CostProfile(12.5, 12500), BudgetPolicy(per_person_cap=10),
        SideConstraints(n_max=1000, enforce_group_privacy_floor=True,
                        blatant_threshold_params=BlatantParams(8000, 0.1)),
    )


# -- sanity bounds ----------------------------------------------------------

def test_blatant_ceiling_values():
    assert blatant_epsilon_ceiling(10**6, 0.99) == pytest.approx(13.80546, abs=1e-5)
    assert math.ceil(blatant_epsilon_ceiling(10**6, 0.99)) == 14
    assert blatant_epsilon_ceiling(8000, 0.1) == pytest.approx(float(mp.log(800)), rel=1e-12)
    # small universe: the second branch dominates
    assert blatant_epsilon_ceiling(2, 0.55) == pytest.approx(float(mp.log(1 / mp.mpf("0.9"))), rel=1e-12)


@pytest.mark.parametrize("x,p", [(1, 0.5), (10, 0.05), (10, 1.0)])
def test_blatant_ceiling_domain(x, p):
    with pytest.raises(ValueError):
        blatant_epsilon_ceiling(x, p)


def test_group_floor():
    assert group_privacy_floor(1000) == 0.001
    with pytest.raises(ValueError):
        group_privacy_floor(0)


def test_override_above_ceiling_rejected():
    with pytest.raises(ValueError):
        SideConstraints(blatant_threshold_params=BlatantParams(8000, 0.1), eps_max_override=7.0)
    s = SideConstraints(blatant_threshold_params=BlatantParams(8000, 0.1), eps_max_override=1.0)
    assert s.epsilon_ceiling() == 1.0


# -- grids and boundary search ----------------------------------------------

@given(lo=st.integers(1, 10**6), span=st.integers(0, 10**12), points=st.integers(2, 3000))
def test_log_grid_distinct_sorted_and_anchored(lo, span, points):
    g = log_int_grid(lo, lo + span, points)
    assert g[0] == lo and g[-1] == lo + span
    assert np.all(np.diff(g) > 0)
    assert g.size == min(points, span + 1)


def test_eps_accuracy_bisection_matches_closed_form_for_mwem():
    n = np.array([10**5, 8.7 * 10**5, 10**7, 10**9], dtype=np.int64)
    got = _eps_accuracy(MWEM_PURE, n, 0.0)
    expected = np.log(mwem_prefactor(MWEM_PURE) / 0.05) / (n * mwem_pure_rate(MWEM_PURE))
    np.testing.assert_allclose(got, expected, rtol=1e-9)


def test_eps_budget_bisection_matches_closed_form():
    n = np.array([1, 100, 20000, 10**6, 10**9], dtype=np.int64)
    problem = FeasibilityProblem(MWEM_APPROX, CostProfile(1, 1e6), BudgetPolicy(total=2e6),
                                 delta=DeltaSearch(DeltaMode.FIXED, 1e-9))
    got = _eps_budget(problem, n, 1e-9)
    expected = np.log1p((2e6 / n - 1e-9 * 1e6) / 1.0)
    np.testing.assert_allclose(got, expected, rtol=1e-9)


def test_eps_budget_markers():
    free = mean_problem(0.0)
    assert np.all(np.isinf(_eps_budget(free, np.array([1, 10]), 0.0)))
    problem = FeasibilityProblem(MWEM_APPROX, CostProfile(1, 1e6), BudgetPolicy(total=1.0),
                                 delta=DeltaSearch(DeltaMode.FIXED, 1e-3))
    # delta*W alone exceeds the per-person share
    assert np.isnan(_eps_budget(problem, np.array([10]), 1e-3)).all()


# -- the mean-estimation scenarios --------------------------------------------

@pytest.mark.parametrize("E,W", [(12.5, 12500), (0.25, 2500), (1.0, 100000)])
def test_scenarios_feasible(E, W):
    out = solve(mean_problem(E, W))
    assert out.status is Status.FEASIBLE
    assert all(d.satisfied for d in out.diagnostics)
    assert out.total_cost <= 3e4


def test_movies_point_beats_sufficient_window():
    out = solve(mean_problem(0.25, 2500))
    window_cost = marginal_cost(PrivacyLevel(0.05 / 6), CostProfile(0.25)) * mean_min_n(MEAN)
    assert out.total_cost < window_cost
    assert out.search_trace_summary["n_cap_reason"] == "cost converged"


def test_smoking_infeasible_with_certificate():
    out = solve(mean_problem(254.8, 1274))
    assert out.status is Status.INFEASIBLE
    cert = out.search_trace_summary["certificate"]
    assert cert["scanned_n_min"] == 1 and cert["scanned_n_max"] == 10**12
    assert cert["min_relative_window_gap"] > 0
    # accuracy needs N*eps >= 119.8, the budget never allows more than 117.8
    n = np.logspace(np.log10(2e4), 12, 200)
    need = 2 / 0.05 * np.log(1 / (0.05 - 2 * np.exp(-n * 0.05**2 / 12)))
    allow = n * np.log1p(3e4 / (254.8 * n))
    assert np.all(need > allow)


def test_education_side_constraints_infeasible():
    out = solve(edu_side_problem())
    assert out.status is Status.INFEASIBLE
    diag = {d.name: d for d in out.diagnostics}
    samp = diag["sampling_term"]
    assert out.search_trace_summary["probe_point"]["n"] == 1000
    assert samp.raw == pytest.approx(2 * math.exp(-1000 * 0.05**2 / 12), rel=1e-12)
    assert samp.raw == pytest.approx(1.624, abs=1e-3)
    assert samp.value == 1.0 and not samp.satisfied


# -- MWEM ------------------------------------------------------------------------

def test_mwem_pure_social_feasible_under_budget():
    problem = FeasibilityProblem(MWEM_PURE, CostProfile(1, 1e5), BudgetPolicy(total=2e6))
    out = solve(problem)
    assert out.status is Status.FEASIBLE
    assert out.total_cost <= 2e6
    assert failure_bound(PrivacyLevel(out.point.epsilon), out.point.n, MWEM_PURE).value <= 0.05 + 1e-9


def test_mwem_approx_searched_delta():
    problem = FeasibilityProblem(MWEM_APPROX, CostProfile(1, 1e6), BudgetPolicy(total=2e6),
                                 delta=DeltaSearch(DeltaMode.SEARCHED))
    out = solve(problem)
    assert out.status is Status.FEASIBLE
    assert out.total_cost <= 2e6
    assert 0 < out.point.delta and out.point.delta * out.point.n <= 0.01
    assert len(out.search_trace_summary["delta_search"]) == 11


def test_mwem_approx_fixed_delta_respects_delta_n_cap():
    fixed = DeltaSearch(DeltaMode.FIXED, 1e-8)
    problem = FeasibilityProblem(MWEM_APPROX, CostProfile(1, 1e6), BudgetPolicy(total=2e6), delta=fixed)
    out = solve(problem)
    assert out.status is Status.INFEASIBLE
    assert out.search_trace_summary["n_search_limit_reason"] == "delta*N cap"
    loose = DeltaSearch(DeltaMode.FIXED, 1e-8, max_delta_n=1.0)
    out = solve(FeasibilityProblem(MWEM_APPROX, CostProfile(1, 1e6), BudgetPolicy(total=2e6), delta=loose))
    assert out.status is Status.FEASIBLE and out.total_cost <= 2e6


def test_problem_rejects_mismatched_delta():
    with pytest.raises(ValueError):
        FeasibilityProblem(MWEM_APPROX, CostProfile(1), BudgetPolicy(total=1))
    with pytest.raises(ValueError):
        FeasibilityProblem(MEAN, CostProfile(1), BudgetPolicy(total=1), delta=DeltaSearch(DeltaMode.SEARCHED))
    with pytest.raises(ValueError):
        DeltaSearch(DeltaMode.SEARCHED, grid_min=0.0)


def test_delta_candidates():
    assert DeltaSearch().candidates() == [0.0]
    c = DeltaSearch(DeltaMode.SEARCHED).candidates()
    assert c[0] == pytest.approx(1e-12) and c[-1] == pytest.approx(1e-2) and len(c) == 11


# -- verification ---------------------------------------------------------------

def test_verify_point_flags_each_violation():
    problem = edu_side_problem()
    diag = {d.name: d for d in verify_point(problem, Point(7.0, 0.0, 2000))}
    assert not diag["n_max"].satisfied
    assert not diag["per_person_cap"].satisfied
    assert not diag["epsilon_ceiling"].satisfied
    assert diag["group_privacy_floor"].satisfied
    diag = {d.name: d for d in verify_point(problem, Point(1e-4, 0.0, 500))}
    assert not diag["group_privacy_floor"].satisfied


# -- properties -------------------------------------------------------------------

mean_specs = st.builds(StudySpec.mean, st.floats(0.02, 0.3), st.floats(0.005, 0.3))


@settings(max_examples=40)
@given(spec=mean_specs, E=st.floats(0.01, 100), budget=st.floats(10, 1e6))
def test_sufficient_window_implies_solver_feasible(spec, E, budget):
    problem = FeasibilityProblem(spec, CostProfile(E), BudgetPolicy(total=budget))
    window = mean_epsilon_window(spec, budget, E)
    out = solve(problem, grid_points=400)
    if window is not None:
        assert out.status is Status.FEASIBLE
        window_cost = marginal_cost(PrivacyLevel(window.lower), problem.profile) * window.n
        assert out.total_cost <= window_cost * (1 + 1e-3)


@settings(max_examples=40)
@given(spec=mean_specs, E=st.floats(0.01, 100), budget=st.floats(10, 1e6),
       cap=st.one_of(st.none(), st.floats(0.01, 100)), n_max=st.one_of(st.none(), st.integers(10, 10**7)),
       floor=st.booleans())
def test_solver_points_revalidate(spec, E, budget, cap, n_max, floor):
    problem = FeasibilityProblem(spec, CostProfile(E), BudgetPolicy(total=budget, per_person_cap=cap),
                                 SideConstraints(n_max=n_max, enforce_group_privacy_floor=floor))
    out = solve(problem, grid_points=300)
    assert out.status is not Status.UNDETERMINED
    if out.feasible:
        residuals = verify_point(problem, out.point, tol=1e-9)
        assert all(r.residual >= -1e-9 for r in residuals)
        assert out.total_cost == pytest.approx(out.per_person_payment * out.point.n, rel=1e-12)


@settings(max_examples=20)
@given(spec=mean_specs, E=st.floats(0.01, 10), budget=st.floats(100, 1e5))
def test_solver_cost_matches_exhaustive_scan(spec, E, budget):
    problem = FeasibilityProblem(spec, CostProfile(E), BudgetPolicy(total=budget))
    out = solve(problem, grid_points=2000)
    assume(out.feasible)
    top = out.search_trace_summary["n_cap"]
    assume(top <= 3 * 10**6)
    n = np.arange(out.search_trace_summary["n_first_feasible"], top + 1, dtype=np.float64)
    T, alpha = spec.target_error, spec.target_failure
    slack = alpha - 2 * np.exp(-n * T * T / 12)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.where(slack > 0, np.maximum(2 / (T * n) * np.log(1 / slack), 0), np.inf)
    cost = np.expm1(eps) * E * n
    ok = np.isfinite(eps) & (cost <= budget)
    assert out.total_cost <= cost[ok].min() * (1 + 1e-6)


def test_solver_is_deterministic():
    a = solve(mean_problem(0.25, 2500))
    b = solve(mean_problem(0.25, 2500))
    assert a.point == b.point and a.total_cost == b.total_cost


def test_grid_points_env(monkeypatch):
    monkeypatch.delenv(GRID_ENV, raising=False)
    assert grid_points_from_env() == 2000
    monkeypatch.setenv(GRID_ENV, "150")
    assert grid_points_from_env() == 150
    assert solve(mean_problem(0.25)).search_trace_summary["grid_points"] == 150
    monkeypatch.setenv(GRID_ENV, "1")
    with pytest.raises(ValueError):
        grid_points_from_env()


# -- region export ------------------------------------------------------------

def test_region_rows_and_consistency():
    rows = region_export(mean_problem(0.25), 25)
    assert len(rows) == 25
    assert [r.n for r in rows] == sorted(r.n for r in rows)
    assert any(r.eps_accuracy_min is not None and r.eps_budget_max is not None
               and r.eps_accuracy_min <= r.eps_budget_max for r in rows)
    assert len(region_export(mean_problem(0.25), 2)) == 2


def test_region_free_participation_has_no_budget_curve():
    rows = region_export(mean_problem(0.0), 10)
    assert all(r.eps_budget_max is None for r in rows)


def test_region_rejects_too_few_samples():
    with pytest.raises(ValueError):
        region_export(mean_problem(0.25), 1)


def test_free_participation_costs_nothing():
    out = solve(mean_problem(0.0, total=1.0))
    assert out.status is Status.FEASIBLE and out.total_cost == 0.0


@pytest.mark.parametrize("problem", [
    mean_problem(0.25),
    mean_problem(12.5, total=1e3),
    FeasibilityProblem(MWEM_PURE, CostProfile(1), BudgetPolicy(total=2e6)),
], ids=["mean", "mean-tight", "mwem"])
def test_epsilon_curves_non_increasing_in_n(problem):
    n = log_int_grid(1, 10**10, 400)
    acc = _eps_accuracy(problem.spec, n, 0.0)
    bud = _eps_budget(problem, n, 0.0)
    finite = np.isfinite(acc)
    assert np.all(np.diff(acc[finite]) <= 1e-12 * acc[finite][:-1])
    ok = ~np.isnan(bud)
    assert np.all(np.diff(bud[ok]) <= 1e-9 * bud[ok][:-1])


def test_region_of_side_constrained_education_never_overlaps():
    rows = region_export(edu_side_problem(), 40)
    assert rows and rows[-1].n <= 1000
    for r in rows:
        assert r.eps_accuracy_min is None or r.eps_budget_max is None or r.eps_accuracy_min > r.eps_budget_max
