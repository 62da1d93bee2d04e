"""Analyst-side failure probabilities A(eps, N) for each supported study kind.

A study fails when some released answer misses its target by ``target_error``
or more. The functions here bound that probability; the solver treats them as
black boxes and only relies on them decreasing in ``eps * n``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from epsiplan.dp_core import LaplaceScale, ProbabilityBound, chernoff_upper, laplace_tail


class StudyKind(str, enum.Enum):
    MEAN_ESTIMATION = "mean_estimation"
    MWEM_PURE = "mwem_pure"
    MWEM_APPROX = "mwem_approx"

    @property
    def is_mwem(self) -> bool:
        return self is not StudyKind.MEAN_ESTIMATION


@dataclass(frozen=True)
class StudySpec:
    """Accuracy target: every answer within ``target_error`` except with
    probability ``target_failure``."""

    kind: StudyKind
    target_error: float
    target_failure: float
    universe_size: int | None = None
    query_count: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", StudyKind(self.kind))
        if not 0.0 < self.target_error < 1.0:
            raise ValueError(f"target_error must lie in (0, 1), got {self.target_error}")
        if not 0.0 < self.target_failure < 1.0:
            raise ValueError(f"target_failure must lie in (0, 1), got {self.target_failure}")
        if self.kind.is_mwem:
            if self.universe_size is None or self.universe_size < 2:
                raise ValueError(f"{self.kind.value} requires universe_size >= 2")
            if self.query_count is None or self.query_count < 1:
                raise ValueError(f"{self.kind.value} requires query_count >= 1")

    @classmethod
    def mean(cls, target_error: float, target_failure: float) -> "StudySpec":
        return cls(StudyKind.MEAN_ESTIMATION, target_error, target_failure)


@dataclass(frozen=True)
class PrivacyLevel:
    """``delta == 0`` is pure epsilon-privacy."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        if not self.epsilon >= 0.0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    @property
    def is_pure(self) -> bool:
        return self.delta == 0.0


class EpsilonWindow(NamedTuple):
    lower: float
    upper: float
    n: int


def _require_kind(spec: StudySpec, kind: StudyKind) -> None:
    if spec.kind is not kind:
        raise ValueError(f"expected a {kind.value} study, got {spec.kind.value}")


def mwem_prefactor(spec: StudySpec) -> float:
    """``32 |C| ln|X| / T^2``, the failure bound at zero privacy budget."""
    return 32.0 * spec.query_count * math.log(spec.universe_size) / spec.target_error**2


def mwem_pure_rate(spec: StudySpec) -> float:
    """Decay rate of the pure MWEM bound per unit ``eps * n``."""
    return spec.target_error**3 / (128.0 * math.log(spec.universe_size))


def mwem_approx_denominator(spec: StudySpec, delta: float) -> float:
    """``8 sqrt(ln|X| ln(1/delta))``."""
    return 8.0 * math.sqrt(math.log(spec.universe_size) * math.log(1.0 / delta))


def failure_raw(spec: StudySpec, epsilon, n, delta: float = 0.0):
    """Unclamped failure bound, vectorized over ``epsilon`` and ``n``.

    ``delta`` is only read for the approximate-DP MWEM kind.
    """
    eps = np.asarray(epsilon, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    T = spec.target_error
    with np.errstate(over="ignore", invalid="ignore"):
        if spec.kind is StudyKind.MEAN_ESTIMATION:
            return 2.0 * np.exp(-n * T * T / 12.0) + np.exp(-T * n * eps / 2.0)
        if spec.kind is StudyKind.MWEM_PURE:
            return mwem_prefactor(spec) * np.exp(-eps * n * mwem_pure_rate(spec))
        denom = mwem_approx_denominator(spec, delta)
        return mwem_prefactor(spec) * np.exp(-eps * n * T * T / denom)


def mean_failure_at(epsilon: float, n: int, target_error: float) -> ProbabilityBound:
    """Sampling error (Chernoff at T/2) plus Laplace tail at T/2."""
    half = target_error / 2.0
    sampling = chernoff_upper(n, half, 1.0).raw
    if epsilon == 0.0:
        noise = 1.0
    else:
        noise = laplace_tail(half, LaplaceScale.for_mean(n, epsilon)).raw
    return ProbabilityBound.from_raw(sampling + noise)


def mean_failure_bound(level: PrivacyLevel, n: int, spec: StudySpec) -> ProbabilityBound:
    _require_kind(spec, StudyKind.MEAN_ESTIMATION)
    if not level.is_pure:
        raise ValueError("the mean-estimation bound is for pure epsilon-privacy (delta == 0)")
    return mean_failure_at(level.epsilon, n, spec.target_error)


def mean_sampling_term(n: int, spec: StudySpec) -> ProbabilityBound:
    return chernoff_upper(n, spec.target_error / 2.0, 1.0)


def mean_min_n(spec: StudySpec) -> int:
    """Smallest N with ``3 exp(-N T^2 / 12) <= alpha``."""
    _require_kind(spec, StudyKind.MEAN_ESTIMATION)
    T, alpha = spec.target_error, spec.target_failure
    return max(1, math.ceil(12.0 / T**2 * math.log(3.0 / alpha)))


def mean_epsilon_window(spec: StudySpec, budget: float, base_cost: float) -> EpsilonWindow | None:
    """Sufficient-condition window ``[T/6, ln(1 + B / (E N))]`` at ``N = mean_min_n``.

    ``None`` means the sufficient condition fails; the study may still be
    feasible and only the exact solver can decide.
    """
    _require_kind(spec, StudyKind.MEAN_ESTIMATION)
    if budget <= 0 or base_cost < 0:
        raise ValueError("budget must be positive and base_cost nonnegative")
    n = mean_min_n(spec)
    lower = spec.target_error / 6.0
    upper = math.inf if base_cost == 0 else math.log1p(budget / (base_cost * n))
    if upper < lower:
        return None
    return EpsilonWindow(lower, upper, n)


def mean_max_base_cost(spec: StudySpec, budget: float) -> float:
    """Largest base cost for which :func:`mean_epsilon_window` is nonempty."""
    n = mean_min_n(spec)
    return budget / (n * math.expm1(spec.target_error / 6.0))


def mean_epsilon_at_n(spec: StudySpec, n: int) -> float | None:
    """Smallest epsilon meeting the target failure at ``n``, or None if sampling
    error alone already uses up the failure budget."""
    _require_kind(spec, StudyKind.MEAN_ESTIMATION)
    T, alpha = spec.target_error, spec.target_failure
    slack = alpha - 2.0 * math.exp(-n * T * T / 12.0)
    if slack <= 0:
        return None
    return max(0.0, 2.0 / (T * n) * math.log(1.0 / slack))


def mwem_pure_failure(level: PrivacyLevel, n: int, spec: StudySpec) -> ProbabilityBound:
    _require_kind(spec, StudyKind.MWEM_PURE)
    if not level.is_pure:
        raise ValueError("pure MWEM takes delta == 0; use the mwem_approx kind for delta > 0")
    return ProbabilityBound.from_raw(failure_raw(spec, level.epsilon, n))


def mwem_approx_failure(level: PrivacyLevel, n: int, spec: StudySpec) -> ProbabilityBound:
    _require_kind(spec, StudyKind.MWEM_APPROX)
    if not 0.0 < level.delta < 1.0:
        raise ValueError("approximate-DP MWEM requires 0 < delta < 1")
    return ProbabilityBound.from_raw(failure_raw(spec, level.epsilon, n, level.delta))


def failure_bound(level: PrivacyLevel, n: int, spec: StudySpec) -> ProbabilityBound:
    """Dispatch to the bound for ``spec.kind``."""
    if spec.kind is StudyKind.MEAN_ESTIMATION:
        return mean_failure_bound(level, n, spec)
    if spec.kind is StudyKind.MWEM_PURE:
        return mwem_pure_failure(level, n, spec)
    return mwem_approx_failure(level, n, spec)
