"""Participant compensation, budget checks, and the private vs non-private cost comparison."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from epsiplan.accuracy import (
    PrivacyLevel,
    StudyKind,
    StudySpec,
    mean_epsilon_window,
)
from epsiplan.dp_core import CONSTRAINT_ATOL


@dataclass(frozen=True)
class CostProfile:
    """What a participant stands to lose.

    base_cost: expected cost of the study to someone who does not take part.
    worst_case: cost of having one's record published in the clear.
    exposure_fraction: share of a non-private study's participants assumed exposed.
    """

    base_cost: float
    worst_case: float = 0.0
    exposure_fraction: float = 0.0

    def __post_init__(self) -> None:
        for name in ("base_cost", "worst_case", "exposure_fraction"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value}")
        if self.exposure_fraction > 1:
            raise ValueError(f"exposure_fraction must be <= 1, got {self.exposure_fraction}")
        if 0 < self.worst_case < self.base_cost:
            warnings.warn(
                f"worst_case ({self.worst_case}) is below base_cost ({self.base_cost}); "
                "full disclosure is normally the costlier event",
                stacklevel=3,
            )


@dataclass(frozen=True)
class BudgetPolicy:
    """Total compensation budget, per-person harm cap, or both."""

    total: float | None = None
    per_person_cap: float | None = None

    def __post_init__(self) -> None:
        if self.total is None and self.per_person_cap is None:
            raise ValueError("a budget policy needs a total, a per-person cap, or both")
        for name in ("total", "per_person_cap"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite nonnegative number, got {value}")

    def per_person_limit(self, n: int) -> float:
        """Largest payment per participant allowed for a study of ``n`` people."""
        limit = math.inf
        if self.total is not None:
            limit = self.total / n
        if self.per_person_cap is not None:
            limit = min(limit, self.per_person_cap)
        return limit


class BudgetCheck(NamedTuple):
    satisfied: bool
    payment: float
    total_cost: float
    residuals: dict[str, float]


class NonPrivateSize(NamedTuple):
    bound: float
    n: int


def _expm1(x: float) -> float:
    try:
        return math.expm1(x)
    except OverflowError:
        return math.inf


def marginal_cost(level: PrivacyLevel, profile: CostProfile) -> float:
    """Per-participant compensation ``(e^eps - 1) E + delta W``."""
    cost = _expm1(level.epsilon) * profile.base_cost
    if level.delta:
        cost += level.delta * profile.worst_case
    return cost


def expected_cost_bounds(level: PrivacyLevel, base: float) -> tuple[float, float]:
    """Range ``[e^-eps E, e^eps E]`` of a participant's expected cost."""
    if not level.is_pure:
        raise ValueError("the multiplicative cost envelope holds for pure epsilon-privacy only")
    return math.exp(-level.epsilon) * base, math.exp(level.epsilon) * base


def budget_satisfied(
    level: PrivacyLevel, n: int, profile: CostProfile, policy: BudgetPolicy
) -> BudgetCheck:
    """Check total and per-person budget constraints.

    Residuals are ``limit - spent`` for each constraint the policy sets, so a
    negative residual is a violation.
    """
    payment = marginal_cost(level, profile)
    total_cost = payment * n
    residuals: dict[str, float] = {}
    if policy.total is not None:
        residuals["total_budget"] = policy.total - total_cost
    if policy.per_person_cap is not None:
        residuals["per_person_cap"] = policy.per_person_cap - payment
    ok = all(r >= -CONSTRAINT_ATOL for r in residuals.values())
    return BudgetCheck(ok, payment, total_cost, residuals)


def _require_mean(spec: StudySpec) -> None:
    if spec.kind is not StudyKind.MEAN_ESTIMATION:
        raise ValueError("the non-private comparison covers mean estimation only")


def nonprivate_min_n(spec: StudySpec) -> NonPrivateSize:
    """Sample size any non-private mean estimate needs: ``ln(1/(2 alpha)) / (8 T^2)``.

    ``bound`` is the real-valued lower bound, ``n`` the whole-person study size.
    """
    _require_mean(spec)
    T, alpha = spec.target_error, spec.target_failure
    bound = max(0.0, math.log(1.0 / (2.0 * alpha)) / (8.0 * T * T))
    return NonPrivateSize(bound, max(1, math.ceil(bound)))


def nonprivate_budget(spec: StudySpec, profile: CostProfile) -> float:
    """Least a non-private study must pay: ``phi * W`` for each of its participants."""
    return profile.exposure_fraction * profile.worst_case * nonprivate_min_n(spec).bound


def private_cheaper_rhs(spec: StudySpec, profile: CostProfile) -> float:
    _require_mean(spec)
    if profile.base_cost <= 0:
        raise ValueError("base_cost must be positive for the comparison condition")
    T, alpha = spec.target_error, spec.target_failure
    ratio = (
        profile.exposure_fraction * profile.worst_case * math.log(1.0 / (2.0 * alpha))
        / (96.0 * profile.base_cost * math.log(3.0 / alpha))
    )
    return math.log1p(ratio)


def private_cheaper(spec: StudySpec, profile: CostProfile) -> bool:
    """Sufficient condition for the private study to undercut the non-private one.

    False is inconclusive, not a proof that the private study costs more.
    """
    return spec.target_error / 6.0 <= private_cheaper_rhs(spec, profile)


def window_cost_at_nonprivate_budget(spec: StudySpec, profile: CostProfile) -> float | None:
    """Cheapest total at the window's lower edge when the budget is the non-private one.

    Returns None when that window is empty.
    """
    budget = nonprivate_budget(spec, profile)
    if budget <= 0:
        return None
    window = mean_epsilon_window(spec, budget, profile.base_cost)
    if window is None:
        return None
    return marginal_cost(PrivacyLevel(window.lower), profile) * window.n
