"""Laplace noise, its tail bound, and Chernoff concentration bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Absolute slack when comparing a constraint value against its threshold.
CONSTRAINT_ATOL = 1e-12


@dataclass(frozen=True)
class ProbabilityBound:
    """A probability bound clamped to [0, 1].

    ``raw`` keeps the unclamped analytic value (which may exceed 1 or be
    non-finite); ``clamped`` records whether clamping changed it.
    """

    value: float
    raw: float
    clamped: bool

    @classmethod
    def from_raw(cls, raw: float) -> "ProbabilityBound":
        raw = float(raw)
        if math.isnan(raw):
            raise ValueError("probability bound evaluated to NaN")
        value = min(max(raw, 0.0), 1.0)
        return cls(value=value, raw=raw, clamped=value != raw)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class LaplaceScale:
    """Noise scale ``sensitivity / epsilon`` for a ``sensitivity``-sensitive statistic."""

    sensitivity: float
    epsilon: float
    scale: float = field(init=False)

    def __post_init__(self) -> None:
        if not (self.sensitivity > 0 and math.isfinite(self.sensitivity)):
            raise ValueError(f"sensitivity must be positive and finite, got {self.sensitivity}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon}")
        object.__setattr__(self, "scale", self.sensitivity / self.epsilon)

    @classmethod
    def for_mean(cls, n: int, epsilon: float) -> "LaplaceScale":
        """Scale for releasing a proportion over ``n`` records (sensitivity 1/n)."""
        return cls(1.0 / n, epsilon)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def laplace_sample(scale: LaplaceScale, rng, size=None):
    """Draw Laplace noise by the inverse-CDF transform of uniform draws.

    ``rng`` is a ``numpy.random.Generator`` (its state advances) or a seed.
    Returns a float when ``size`` is None, otherwise an array.
    """
    gen = _as_generator(rng)
    # random() is k / 2**53 on [0, 1); the half-step shift makes it open
    u = gen.random(size) + 2.0**-54
    v = u - 0.5
    noise = -scale.scale * np.sign(v) * np.log1p(-2.0 * np.abs(v))
    if size is None:
        return float(noise)
    return noise


def laplace_tail(threshold: float, scale: LaplaceScale) -> ProbabilityBound:
    """``Pr[|noise| >= threshold] <= exp(-threshold / scale)``."""
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    return ProbabilityBound.from_raw(math.exp(-threshold / scale.scale))


def _check_deviation(deviation: float) -> None:
    if not 0.0 <= deviation <= 1.0:
        raise ValueError(f"deviation must lie in [0, 1], got {deviation}")


def chernoff_upper(n: float, deviation: float, mu: float = 1.0) -> ProbabilityBound:
    """Two-sided Chernoff upper bound ``2 exp(-n dev^2 / (3 mu))`` on sample-mean deviation."""
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    _check_deviation(deviation)
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    return ProbabilityBound.from_raw(2.0 * math.exp(-n * deviation**2 / (3.0 * mu)))


def chernoff_lower(n: float, deviation: float, mu: float = 0.25) -> ProbabilityBound:
    """Lower bound ``exp(-2 n dev^2 / mu) / 2`` on the deviation probability.

    Only valid for populations with mean at most 1/4.
    """
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    _check_deviation(deviation)
    if not 0.0 < mu <= 0.25:
        raise ValueError(f"the lower Chernoff bound requires 0 < mu <= 1/4, got {mu}")
    return ProbabilityBound.from_raw(0.5 * math.exp(-2.0 * n * deviation**2 / mu))
