"""Monte Carlo check of the mean-estimation failure bound.

Each trial draws a synthetic 0/1 population sample, releases its mean through
the Laplace mechanism, and records a failure when the release misses the
population mean by the target error or more. The empirical failure rate is
compared with the analytic bound using a one-sided 4-standard-error band.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from typing import Any

import numpy as np

from epsiplan import kernels
from epsiplan.accuracy import mean_failure_at
from epsiplan.dp_core import LaplaceScale, ProbabilityBound, laplace_sample

BAND_STDERRS = 4.0
MIN_TRIALS = 100
MIN_MOMENT_DRAWS = 100_000


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent_with_bound"
    VIOLATED = "bound_violated"


@dataclass(frozen=True)
class SimulationConfig:
    population_mean: float
    n: int
    epsilon: float
    target_error: float
    trials: int = 10_000
    seed: int = 42

    def __post_init__(self) -> None:
        if not 0.0 <= self.population_mean <= 1.0:
            raise ValueError(f"population_mean must lie in [0, 1], got {self.population_mean}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.target_error < 1.0:
            raise ValueError(f"target_error must lie in (0, 1), got {self.target_error}")
        if self.trials < MIN_TRIALS:
            raise ValueError(f"trials must be >= {MIN_TRIALS}, got {self.trials}")


@dataclass(frozen=True)
class SimulationReport:
    failures: int
    trials: int
    empirical_rate: float
    analytic_bound: ProbabilityBound
    stderr: float
    verdict: Verdict

    @property
    def empirical_stderr(self) -> float:
        p = self.empirical_rate
        return math.sqrt(p * (1.0 - p) / self.trials)

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["analytic_bound"] = self.analytic_bound.value
        d["analytic_bound_raw"] = self.analytic_bound.raw
        d["verdict"] = self.verdict.value
        return d


def judge(failures: int, trials: int, bound: ProbabilityBound) -> SimulationReport:
    """Compare a failure count against ``bound``.

    ``stderr`` is the binomial standard error of the rate if the true failure
    probability sat exactly at the bound.
    """
    rate = failures / trials
    b = bound.value
    stderr = math.sqrt(b * (1.0 - b) / trials)
    verdict = Verdict.VIOLATED if rate > b + BAND_STDERRS * stderr else Verdict.CONSISTENT
    return SimulationReport(failures, trials, rate, bound, stderr, verdict)


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    size = -(-trials // workers)
    return [(start, min(size, trials - start)) for start in range(0, trials, size)]


def run_mean_study(
    config: SimulationConfig, backend: str | None = None, workers: int = 1
) -> SimulationReport:
    """Simulate the noisy proportion release ``config.trials`` times.

    Trials are keyed on ``(seed, trial index)``, so splitting them across
    ``workers`` threads gives the same counts as one sequential pass.
    """
    scale = LaplaceScale.for_mean(config.n, config.epsilon).scale

    def count(chunk: tuple[int, int]) -> int:
        first, size = chunk
        return kernels.mean_study_failures(
            config.seed, first, size, config.n, config.population_mean,
            scale, config.target_error, backend=backend,
        )

    chunks = _chunks(config.trials, max(1, workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(count, chunks))
    else:
        failures = sum(map(count, chunks))
    bound = mean_failure_at(config.epsilon, config.n, config.target_error)
    return judge(failures, config.trials, bound)


DEFAULT_GRID = {
    "population_mean": (0.1, 0.5),
    "n": (1_000, 20_000),
    "epsilon": (0.01, 0.1, 1.0),
    "target_error": (0.02, 0.05),
}


def validation_grid(
    trials: int = 10_000, seed: int = 42, grid: dict | None = None, backend: str | None = None
) -> list[tuple[SimulationConfig, SimulationReport]]:
    """Run :func:`run_mean_study` on every cell of a parameter grid."""
    grid = grid or DEFAULT_GRID
    out = []
    for mu, n, eps, T in product(
        grid["population_mean"], grid["n"], grid["epsilon"], grid["target_error"]
    ):
        cfg = SimulationConfig(mu, n, eps, T, trials, seed)
        out.append((cfg, run_mean_study(cfg, backend=backend)))
    return out


@dataclass(frozen=True)
class MomentReport:
    draws: int
    mean: float
    variance: float
    expected_variance: float
    mean_stderr: float
    variance_stderr: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.mean) <= BAND_STDERRS * self.mean_stderr

    @property
    def variance_ok(self) -> bool:
        return abs(self.variance - self.expected_variance) <= BAND_STDERRS * self.variance_stderr

    @property
    def ok(self) -> bool:
        return self.mean_ok and self.variance_ok


def verify_laplace_moments(scale: LaplaceScale, draws: int, seed: int = 0) -> MomentReport:
    """Sample mean and variance of the Laplace sampler against 0 and ``2 b^2``.

    Standard errors use the Laplace fourth moment ``24 b^4``, so the variance
    estimate has standard error ``b^2 sqrt(20 / draws)``.
    """
    if draws < MIN_MOMENT_DRAWS:
        raise ValueError(f"draws must be >= {MIN_MOMENT_DRAWS}, got {draws}")
    x = laplace_sample(scale, np.random.default_rng(seed), size=draws)
    b = scale.scale
    return MomentReport(
        draws=draws,
        mean=float(x.mean()),
        variance=float(x.var()),
        expected_variance=2.0 * b * b,
        mean_stderr=math.sqrt(2.0) * b / math.sqrt(draws),
        variance_stderr=b * b * math.sqrt(20.0 / draws),
    )
