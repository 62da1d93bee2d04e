"""Solve the joint accuracy/budget/side-constraint system over (epsilon, delta, N).

For a fixed delta and study size N every constraint reduces to an interval on
epsilon: accuracy gives a lower end (failure bounds decrease in epsilon),
compensation gives an upper end (payments increase in epsilon), and the sanity
bounds clip both. N is feasible iff that interval is nonempty. The solver scans
N on a log grid, refines with integer bisection, and picks the cheapest point.
"""
from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from epsiplan.accuracy import (
    PrivacyLevel,
    StudyKind,
    StudySpec,
    failure_bound,
    failure_raw,
    mean_sampling_term,
)
from epsiplan.economics import BudgetPolicy, CostProfile, budget_satisfied

GRID_ENV = "EPSIPLAN_GRID_POINTS"
DEFAULT_GRID_POINTS = 2000
# Hard ceiling on study size when nothing else bounds it.
N_HARD_LIMIT = 10**12
# The cheapest-point search stops doubling N once a doubling saves less than
# this fraction of the total cost, and never goes past CAP_FACTOR * (first feasible N).
COST_IMPROVEMENT_TOL = 1e-3
CAP_FACTOR = 1000
BISECT_RTOL = 1e-10
BISECT_MAX_ITER = 60
# Growing/shrinking the epsilon bracket stops at 2**+-_BRACKET_EXP.
_BRACKET_EXP = 60
VERIFY_TOL = 1e-9


def grid_points_from_env() -> int:
    raw = os.environ.get(GRID_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_GRID_POINTS
    points = int(raw)
    if points < 2:
        raise ValueError(f"{GRID_ENV} must be at least 2, got {points}")
    return points


# ---------------------------------------------------------------------------
# sanity bounds
# ---------------------------------------------------------------------------

def blatant_epsilon_ceiling(universe_size: int, capture_probability: float) -> float:
    """Epsilon at which a mechanism that publishes a targeted record with
    probability ``capture_probability`` already counts as private.

    Choosing epsilon at or above this value gives a meaningless guarantee.
    """
    if universe_size < 2:
        raise ValueError(f"universe_size must be >= 2, got {universe_size}")
    if not 1.0 / universe_size < capture_probability < 1.0:
        raise ValueError(
            "capture_probability must lie in (1/|X|, 1) for the mechanism to single out a record"
        )
    x = float(universe_size)
    return max(
        math.log(capture_probability * x),
        math.log((x - 1.0) / (x * (1.0 - capture_probability))),
    )


def group_privacy_floor(n: int) -> float:
    """Below ``1/n`` the output barely depends on the database at all."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 / n


@dataclass(frozen=True)
class BlatantParams:
    universe_size: int
    capture_probability: float

    def ceiling(self) -> float:
        return blatant_epsilon_ceiling(self.universe_size, self.capture_probability)


@dataclass(frozen=True)
class SideConstraints:
    n_max: int | None = None
    enforce_group_privacy_floor: bool = False
    blatant_threshold_params: BlatantParams | None = None
    eps_max_override: float | None = None

    def __post_init__(self) -> None:
        if self.n_max is not None and self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if self.eps_max_override is not None:
            if not self.eps_max_override > 0:
                raise ValueError("eps_max_override must be positive")
            if self.blatant_threshold_params is not None:
                ceiling = self.blatant_threshold_params.ceiling()
                if self.eps_max_override > ceiling:
                    raise ValueError(
                        f"eps_max_override {self.eps_max_override} exceeds the blatant "
                        f"ceiling {ceiling:.6g}"
                    )

    def epsilon_ceiling(self) -> float:
        ceiling = math.inf
        if self.blatant_threshold_params is not None:
            ceiling = self.blatant_threshold_params.ceiling()
        if self.eps_max_override is not None:
            ceiling = min(ceiling, self.eps_max_override)
        return ceiling

    def epsilon_floor(self, n):
        if self.enforce_group_privacy_floor:
            return 1.0 / np.asarray(n, dtype=np.float64)
        return np.zeros(np.shape(n))


# ---------------------------------------------------------------------------
# problem / outcome types
# ---------------------------------------------------------------------------

class DeltaMode(str, enum.Enum):
    PURE = "pure"
    FIXED = "fixed"
    SEARCHED = "searched"


@dataclass(frozen=True)
class DeltaSearch:
    """How delta is chosen, and the ``delta * N <= max_delta_n`` sanity cap."""

    mode: DeltaMode = DeltaMode.PURE
    value: float = 0.0
    grid_min: float = 1e-12
    grid_max: float = 1e-2
    grid_points: int = 11
    max_delta_n: float = 0.01

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DeltaMode(self.mode))
        if not 0.0 <= self.value < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.value}")
        if self.mode is DeltaMode.SEARCHED:
            if not 0.0 < self.grid_min <= self.grid_max < 1.0:
                raise ValueError("delta grid needs 0 < grid_min <= grid_max < 1")
            if self.grid_points < 1:
                raise ValueError("delta grid needs at least one point")
        if not self.max_delta_n > 0:
            raise ValueError("max_delta_n must be positive")

    def candidates(self) -> list[float]:
        if self.mode is DeltaMode.PURE:
            return [0.0]
        if self.mode is DeltaMode.FIXED:
            return [self.value]
        if self.grid_points == 1:
            return [self.grid_min]
        return [float(d) for d in np.geomspace(self.grid_min, self.grid_max, self.grid_points)]


@dataclass(frozen=True)
class FeasibilityProblem:
    spec: StudySpec
    profile: CostProfile
    policy: BudgetPolicy
    sides: SideConstraints = field(default_factory=SideConstraints)
    delta: DeltaSearch = field(default_factory=DeltaSearch)

    def __post_init__(self) -> None:
        mode = self.delta.mode
        if self.spec.kind is StudyKind.MWEM_APPROX:
            if mode is DeltaMode.PURE or (mode is DeltaMode.FIXED and self.delta.value == 0.0):
                raise ValueError("mwem_approx needs delta > 0 (fixed or searched)")
        elif mode is DeltaMode.SEARCHED or self.delta.value != 0.0:
            raise ValueError(f"{self.spec.kind.value} is a pure-privacy study; delta must be 0")


class Status(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNDETERMINED = "undetermined"


class Point(NamedTuple):
    epsilon: float
    delta: float
    n: int


@dataclass(frozen=True)
class ConstraintResidual:
    """One constraint evaluated at a point; ``residual >= 0`` means satisfied."""

    name: str
    value: float
    limit: float
    residual: float
    satisfied: bool
    raw: float | None = None

    def as_dict(self) -> dict[str, Any]:
        d = {
            "name": self.name,
            "value": self.value,
            "limit": self.limit,
            "residual": self.residual,
            "satisfied": self.satisfied,
        }
        if self.raw is not None:
            d["raw"] = self.raw
        return d


@dataclass
class FeasibilityOutcome:
    status: Status
    point: Point | None = None
    per_person_payment: float | None = None
    total_cost: float | None = None
    diagnostics: list[ConstraintResidual] = field(default_factory=list)
    search_trace_summary: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


# ---------------------------------------------------------------------------
# grids and vectorized epsilon bounds
# ---------------------------------------------------------------------------

def log_int_grid(lo: int, hi: int, points: int) -> np.ndarray:
    """``points`` distinct integers from ``lo`` to ``hi``, roughly log-spaced.

    Returns every integer in range when there are fewer than ``points``.
    """
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if hi - lo + 1 <= points:
        return np.arange(lo, hi + 1, dtype=np.int64)
    if points == 1:
        return np.array([lo], dtype=np.int64)
    idx = np.arange(points, dtype=np.int64)
    r = np.rint(np.geomspace(lo, hi, points)).astype(np.int64)
    r[0], r[-1] = lo, hi
    r = np.maximum.accumulate(r - idx) + idx
    return np.minimum(r, hi - (points - 1) + idx)


def _expm1(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.expm1(x)


def _boundary(ok, size: int, ok_above: bool) -> np.ndarray:
    """Locate the epsilon where a monotone predicate flips, on the ``ok`` side.

    ``ok(eps)`` maps an epsilon array of length ``size`` to booleans. With
    ``ok_above`` the predicate holds for eps >= root and the result is the
    smallest ok epsilon (``inf`` if none up to 2**60); otherwise it holds for
    eps <= root and the result is the largest ok epsilon (``nan`` when even
    eps = 0 fails, ``inf`` when it never fails).
    """
    def above(eps):
        return ok(eps) if ok_above else ~ok(eps)

    above_zero = above(np.zeros(size))
    above_big = above(np.full(size, 2.0**_BRACKET_EXP))
    if ok_above:
        out = np.where(above_zero, 0.0, np.where(above_big, np.nan, np.inf))
    else:
        out = np.where(above_zero, np.nan, np.where(above_big, np.nan, np.inf))
    active = ~above_zero & above_big
    if not active.any():
        return out

    # octave bracket around the root: above(lo) false, above(hi) true
    ones = np.ones(size)
    a = above(ones)
    lo = np.where(a, 0.5, 1.0)
    hi = np.where(a, 1.0, 2.0)
    shrink = active & a & above(lo)
    grow = active & ~a & ~above(hi)
    for _ in range(_BRACKET_EXP):
        if not (shrink.any() or grow.any()):
            break
        hi = np.where(shrink, lo, np.where(grow, hi * 2.0, hi))
        lo = np.where(shrink, lo / 2.0, np.where(grow, lo * 2.0, lo))
        shrink = shrink & above(lo)
        grow = grow & ~above(hi)
    # roots below 2**-60: bisect down from zero
    lo = np.where(shrink, 0.0, lo)

    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        am = above(mid)
        hi = np.where(active & am, mid, hi)
        lo = np.where(active & ~am, mid, lo)
        if np.all((hi - lo)[active] <= BISECT_RTOL * hi[active]):
            break
    return np.where(active, hi if ok_above else lo, out)


class _Evaluation(NamedTuple):
    n: np.ndarray
    eps_accuracy: np.ndarray   # inf: accuracy unattainable
    eps_budget: np.ndarray     # nan: no epsilon affordable; inf: unbounded
    lower: np.ndarray          # eps_accuracy clipped by the floor
    upper: np.ndarray          # eps_budget clipped by the ceiling
    feasible: np.ndarray
    payment: np.ndarray
    cost: np.ndarray           # inf where infeasible


def _eps_accuracy(spec: StudySpec, n: np.ndarray, delta: float) -> np.ndarray:
    nf = n.astype(np.float64)
    if spec.kind is StudyKind.MEAN_ESTIMATION:
        T, alpha = spec.target_error, spec.target_failure
        slack = alpha - 2.0 * np.exp(-nf * T * T / 12.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = 2.0 / (T * nf) * np.log(1.0 / slack)
        return np.where(slack > 0, np.maximum(eps, 0.0), np.inf)
    alpha = spec.target_failure
    return _boundary(lambda e: failure_raw(spec, e, nf, delta) <= alpha, n.size, ok_above=True)


def _eps_budget(problem: FeasibilityProblem, n: np.ndarray, delta: float) -> np.ndarray:
    profile, policy = problem.profile, problem.policy
    nf = n.astype(np.float64)
    limit = np.full(n.size, math.inf)
    if policy.total is not None:
        limit = policy.total / nf
    if policy.per_person_cap is not None:
        limit = np.minimum(limit, policy.per_person_cap)
    fixed = delta * profile.worst_case
    if profile.base_cost == 0:
        # epsilon is free: only the delta term can exhaust the budget
        return np.where(fixed <= limit, np.inf, np.nan)

    def ok(eps):
        return _expm1(eps) * profile.base_cost + fixed <= limit

    return _boundary(ok, n.size, ok_above=False)


def _evaluate(problem: FeasibilityProblem, n: np.ndarray, delta: float, n_limit: int) -> _Evaluation:
    n = np.asarray(n, dtype=np.int64)
    eps_acc = _eps_accuracy(problem.spec, n, delta)
    eps_bud = _eps_budget(problem, n, delta)
    lower = np.maximum(eps_acc, problem.sides.epsilon_floor(n))
    upper = np.minimum(eps_bud, problem.sides.epsilon_ceiling())
    with np.errstate(invalid="ignore"):
        feasible = np.isfinite(lower) & ~np.isnan(upper) & (lower <= upper) & (n <= n_limit)
    payment = _expm1(np.where(feasible, lower, 0.0)) * problem.profile.base_cost
    payment = payment + delta * problem.profile.worst_case
    cost = np.where(feasible, payment * n, np.inf)
    return _Evaluation(n, eps_acc, eps_bud, lower, upper, feasible, payment, cost)


def _search_limit(problem: FeasibilityProblem, delta: float) -> tuple[int, str]:
    limit, reason = N_HARD_LIMIT, "hard limit"
    if problem.sides.n_max is not None and problem.sides.n_max < limit:
        limit, reason = problem.sides.n_max, "n_max"
    if delta > 0:
        by_delta = math.floor(problem.delta.max_delta_n / delta)
        if by_delta < limit:
            limit, reason = by_delta, "delta*N cap"
        fixed = delta * problem.profile.worst_case
        if problem.policy.total is not None and fixed > 0:
            by_budget = math.floor(problem.policy.total / fixed)
            if by_budget < limit:
                limit, reason = by_budget, "delta*W*N <= B"
    return max(limit, 0), reason


def _key(ev: _Evaluation, i: int) -> tuple[float, float, int]:
    return (float(ev.cost[i]), float(ev.lower[i]), int(ev.n[i]))


# ---------------------------------------------------------------------------
# independent re-verification
# ---------------------------------------------------------------------------

def verify_point(problem: FeasibilityProblem, point: Point, tol: float = VERIFY_TOL) -> list[ConstraintResidual]:
    """Evaluate every exact constraint at ``point`` through the public bound functions."""
    eps, delta, n = point
    spec, sides = problem.spec, problem.sides
    out: list[ConstraintResidual] = []

    def add(name, value, limit, upper_limit=True, raw=None):
        residual = (limit - value) if upper_limit else (value - limit)
        out.append(ConstraintResidual(name, value, limit, residual, residual >= -tol, raw))

    level = PrivacyLevel(eps, delta)
    acc = failure_bound(level, n, spec)
    add("accuracy", acc.value, spec.target_failure, raw=acc.raw)
    if spec.kind is StudyKind.MEAN_ESTIMATION:
        samp = mean_sampling_term(n, spec)
        add("sampling_term", samp.value, spec.target_failure, raw=samp.raw)

    check = budget_satisfied(level, n, problem.profile, problem.policy)
    if problem.policy.total is not None:
        add("total_budget", check.total_cost, problem.policy.total)
    if problem.policy.per_person_cap is not None:
        add("per_person_cap", check.payment, problem.policy.per_person_cap)
    if sides.n_max is not None:
        add("n_max", float(n), float(sides.n_max))
    if sides.enforce_group_privacy_floor:
        add("group_privacy_floor", eps, group_privacy_floor(n), upper_limit=False)
    ceiling = sides.epsilon_ceiling()
    if math.isfinite(ceiling):
        add("epsilon_ceiling", eps, ceiling)
    if delta > 0:
        add("delta_n", delta * n, problem.delta.max_delta_n)
    return out


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def _first_feasible(problem, grid_ev: _Evaluation, delta: float, n_limit: int) -> int:
    k = int(np.argmax(grid_ev.feasible))
    hi = int(grid_ev.n[k])
    if k == 0:
        return hi
    lo = int(grid_ev.n[k - 1])
    # integer bisection: lo infeasible, hi feasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _evaluate(problem, np.array([mid]), delta, n_limit).feasible[0]:
            hi = mid
        else:
            lo = mid
    return hi


def _cost_at(problem, n: int, delta: float, n_limit: int) -> float:
    return float(_evaluate(problem, np.array([n]), delta, n_limit).cost[0])


def _refine(problem, ev: _Evaluation, best: int, delta: float, n_limit: int, points: int = 33):
    """Shrink the bracket around the best grid point until every integer is checked."""
    lo = int(ev.n[max(best - 1, 0)])
    hi = int(ev.n[min(best + 1, ev.n.size - 1)])
    best_key, best_ev, best_i = _key(ev, best), ev, best
    evaluations = 0
    while True:
        sub = np.unique(np.rint(np.linspace(lo, hi, points)).astype(np.int64))
        sev = _evaluate(problem, sub, delta, n_limit)
        evaluations += sub.size
        i = min(range(sub.size), key=lambda j: _key(sev, j))
        if _key(sev, i) < best_key:
            best_key, best_ev, best_i = _key(sev, i), sev, i
        if hi - lo <= points:
            break
        lo = int(sub[max(i - 1, 0)])
        hi = int(sub[min(i + 1, sub.size - 1)])
    return best_ev, best_i, evaluations


def _infeasible_probe(problem, ev: _Evaluation) -> Point:
    """The grid point that comes closest to feasibility, for diagnostics."""
    finite = np.isfinite(ev.lower) & ~np.isnan(ev.upper)
    if finite.any():
        gap = np.where(finite, ev.lower - ev.upper, np.inf)
        i = int(np.argmin(gap))
    else:
        i = ev.n.size - 1
    upper = ev.upper[i]
    if np.isnan(upper):
        eps = 0.0
    elif np.isfinite(upper):
        eps = float(upper)
    else:
        eps = float(ev.lower[i]) if np.isfinite(ev.lower[i]) else 1.0
    return Point(max(eps, 0.0), 0.0, int(ev.n[i]))


def _solve_fixed_delta(problem: FeasibilityProblem, delta: float, points: int) -> FeasibilityOutcome:
    n_limit, limit_reason = _search_limit(problem, delta)
    trace: dict[str, Any] = {
        "delta": delta,
        "grid_points": points,
        "n_search_limit": n_limit,
        "n_search_limit_reason": limit_reason,
    }
    if n_limit < 1:
        trace["certificate"] = "no admissible study size"
        return FeasibilityOutcome(Status.INFEASIBLE, search_trace_summary=trace)

    grid = log_int_grid(1, n_limit, points)
    ev = _evaluate(problem, grid, delta, n_limit)
    evaluations = grid.size
    if np.isnan(ev.eps_accuracy).any() or np.isnan(ev.cost[ev.feasible]).any():
        trace["error"] = "non-finite intermediate in constraint evaluation"
        return FeasibilityOutcome(Status.UNDETERMINED, search_trace_summary=trace)

    if not ev.feasible.any():
        finite = np.isfinite(ev.lower) & np.isfinite(ev.upper)
        with np.errstate(divide="ignore", invalid="ignore"):
            gap = np.where(finite, (ev.lower - ev.upper) / np.abs(ev.upper), np.inf)
        trace["certificate"] = {
            "scanned_n_min": int(grid[0]),
            "scanned_n_max": int(grid[-1]),
            "scanned_points": int(grid.size),
            "accuracy_unattainable_points": int(np.count_nonzero(~np.isfinite(ev.eps_accuracy))),
            "budget_unaffordable_points": int(np.count_nonzero(np.isnan(ev.eps_budget))),
            "min_relative_window_gap": float(gap.min()) if finite.any() else None,
        }
        trace["evaluations"] = evaluations
        probe = _infeasible_probe(problem, ev)._replace(delta=delta)
        trace["probe_point"] = probe._asdict()
        return FeasibilityOutcome(
            Status.INFEASIBLE,
            diagnostics=verify_point(problem, probe),
            search_trace_summary=trace,
        )

    n_first = _first_feasible(problem, ev, delta, n_limit)
    # stop growing N once a doubling no longer pays for itself
    cap_limit = min(n_limit, CAP_FACTOR * n_first)
    n_cap, cap_reason = n_first, "limit"
    while n_cap < cap_limit:
        nxt = min(2 * n_cap, cap_limit)
        here, there = _cost_at(problem, n_cap, delta, n_limit), _cost_at(problem, nxt, delta, n_limit)
        evaluations += 2
        n_cap = nxt
        if not here - there > COST_IMPROVEMENT_TOL * here:
            cap_reason = "cost converged"
            break
    trace.update(n_first_feasible=n_first, n_cap=n_cap, n_cap_reason=cap_reason)

    grid2 = log_int_grid(n_first, n_cap, points)
    ev2 = _evaluate(problem, grid2, delta, n_limit)
    evaluations += grid2.size
    feasible_idx = np.flatnonzero(ev2.feasible)
    best = min(feasible_idx, key=lambda j: _key(ev2, j))
    best_ev, best_i, extra = _refine(problem, ev2, int(best), delta, n_limit)
    evaluations += extra
    trace["feasible_grid_points"] = int(feasible_idx.size)
    trace["evaluations"] = evaluations

    point = Point(float(best_ev.lower[best_i]), delta, int(best_ev.n[best_i]))
    diagnostics = verify_point(problem, point)
    if not all(d.satisfied for d in diagnostics):
        trace["error"] = "re-verification failed at the selected point"
        return FeasibilityOutcome(Status.UNDETERMINED, point=point, diagnostics=diagnostics,
                                  search_trace_summary=trace)
    payment = float(best_ev.payment[best_i])
    return FeasibilityOutcome(
        Status.FEASIBLE,
        point=point,
        per_person_payment=payment,
        total_cost=payment * point.n,
        diagnostics=diagnostics,
        search_trace_summary=trace,
    )


def solve(problem: FeasibilityProblem, grid_points: int | None = None) -> FeasibilityOutcome:
    """Find the cheapest (epsilon, delta, N) meeting every constraint.

    Ties on total cost go to the smaller epsilon, then the smaller N, then the
    smaller delta. Deterministic: no randomized search.
    """
    points = grid_points if grid_points is not None else grid_points_from_env()
    outcomes = [_solve_fixed_delta(problem, d, points) for d in problem.delta.candidates()]
    if len(outcomes) == 1:
        return outcomes[0]

    per_delta = [
        {"delta": o.search_trace_summary.get("delta"), "status": o.status.value, "total_cost": o.total_cost}
        for o in outcomes
    ]
    feasible = [o for o in outcomes if o.feasible]
    if feasible:
        best = min(feasible, key=lambda o: (o.total_cost, o.point.epsilon, o.point.n, o.point.delta))
    elif any(o.status is Status.UNDETERMINED for o in outcomes):
        best = next(o for o in outcomes if o.status is Status.UNDETERMINED)
    else:
        best = outcomes[0]
    summary = dict(best.search_trace_summary)
    summary["delta_search"] = per_delta
    return FeasibilityOutcome(best.status, best.point, best.per_person_payment, best.total_cost,
                              best.diagnostics, summary)


# ---------------------------------------------------------------------------
# region export
# ---------------------------------------------------------------------------

class RegionRow(NamedTuple):
    n: int
    eps_accuracy_min: float | None
    eps_budget_max: float | None


def region_export(
    problem: FeasibilityProblem,
    samples: int,
    delta: float | None = None,
    grid_points: int | None = None,
) -> list[RegionRow]:
    """Constant-accuracy and constant-budget curves on ``samples`` study sizes.

    Both columns include the side constraints (floor on the accuracy side,
    ceiling on the budget side). ``None`` marks an absent value: accuracy
    unattainable, or no finite / no affordable budget limit on epsilon.
    The N range is the solver's search range for the chosen delta; for a
    searched delta the solver's pick is used.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    outcome = None
    if delta is None:
        if problem.delta.mode is DeltaMode.SEARCHED:
            outcome = solve(problem, grid_points)
            delta = outcome.point.delta if outcome.point else problem.delta.candidates()[0]
        else:
            delta = problem.delta.candidates()[0]
    n_limit, _ = _search_limit(problem, delta)
    if n_limit < 1:
        return []
    if outcome is None or outcome.search_trace_summary.get("delta") != delta:
        outcome = _solve_fixed_delta(
            problem, delta, grid_points if grid_points is not None else grid_points_from_env()
        )
    top = outcome.search_trace_summary.get("n_cap", n_limit)
    grid = log_int_grid(1, max(int(top), 1), samples)
    ev = _evaluate(problem, grid, delta, n_limit)
    rows = []
    for i in range(grid.size):
        lo, hi = ev.lower[i], ev.upper[i]
        rows.append(RegionRow(
            int(grid[i]),
            float(lo) if np.isfinite(lo) else None,
            float(hi) if np.isfinite(hi) else None,
        ))
    return rows
