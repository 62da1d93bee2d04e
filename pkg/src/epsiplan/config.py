"""JSON plan configuration and the built-in cost scenarios.

A config is one JSON object with the sections ``study``, ``costs`` (or a
``scenario`` preset), ``budget``, ``sides`` and ``delta``. Every value is
checked on load; errors carry the dotted path of the offending field.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from epsiplan.accuracy import StudyKind, StudySpec
from epsiplan.economics import BudgetPolicy, CostProfile
from epsiplan.feasibility import (
    BlatantParams,
    DeltaMode,
    DeltaSearch,
    FeasibilityProblem,
    SideConstraints,
)


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    base_cost: float
    worst_case: float
    note: str


# Base cost is (chance of the bad event without participating) x (its cost).
PRESETS: dict[str, ScenarioPreset] = {
    "smoking": ScenarioPreset(
        "smoking", 254.8, 1274.0,
        "insurance premium rise of 1274 for smokers; 20% chance of being found out anyway",
    ),
    "education": ScenarioPreset(
        "education", 12.5, 12500.0,
        "salary cut of 12500 if grades leak; E taken as 0.01 x 12500",
    ),
    "movies": ScenarioPreset(
        "movies", 0.25, 2500.0,
        "statutory damages of 2500 for disclosed rental records; E taken as 0.0001 x 2500",
    ),
    "social": ScenarioPreset(
        "social", 1.0, 100000.0,
        "deanonymization cost of 100000; 1e-5 chance of disclosure anyway",
    ),
}

_SECTIONS = {"study", "costs", "scenario", "budget", "sides", "delta"}


@dataclass(frozen=True)
class PlanConfig:
    problem: FeasibilityProblem
    scenario: str | None
    cost_fields: frozenset[str]

    @property
    def spec(self) -> StudySpec:
        return self.problem.spec


def _section(doc: dict, key: str, required: bool) -> dict:
    value = doc.get(key)
    if value is None:
        if required:
            raise ConfigError(key, "section is required")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(key, "must be an object")
    return value


def _check_keys(section: dict, path: str, allowed: set[str]) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", f"unknown field (expected one of {sorted(allowed)})")


def _real(section: dict, path: str, key: str, default: Any = None, required: bool = False):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}", "is required")
        return default
    value = section[key]
    if isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "must be a number, not a boolean")
    if isinstance(value, str):
        try:
            value = float(value.strip())
        except ValueError:
            raise ConfigError(f"{path}.{key}", f"cannot parse {section[key]!r} as a number") from None
    if not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", "must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return value


def _integer(section: dict, path: str, key: str, default: Any = None, required: bool = False):
    value = _real(section, path, key, default=None, required=required)
    if value is None:
        return default
    if value != int(value):
        raise ConfigError(f"{path}.{key}", f"must be a whole number, got {value}")
    return int(value)


def _flag(section: dict, path: str, key: str, default: bool = False) -> bool:
    value = section.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "must be true or false")
    return value


def _build(path: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_kind(section: dict) -> StudyKind:
    raw = section.get("kind", StudyKind.MEAN_ESTIMATION.value)
    if not isinstance(raw, str):
        raise ConfigError("study.kind", "must be a string")
    norm = raw.replace("_", "").replace("-", "").lower()
    for kind in StudyKind:
        if kind.value.replace("_", "") == norm:
            return kind
    raise ConfigError("study.kind", f"unknown study kind {raw!r}; expected one of {[k.value for k in StudyKind]}")


def parse_config(doc: Any) -> PlanConfig:
    if not isinstance(doc, dict):
        raise ConfigError("", "config must be a JSON object")
    _check_keys(doc, "config", _SECTIONS)

    study = _section(doc, "study", required=True)
    _check_keys(study, "study", {"kind", "target_error", "target_failure", "universe_size", "query_count"})
    kind = _parse_kind(study)
    spec = _build(
        "study", StudySpec, kind,
        _real(study, "study", "target_error", required=True),
        _real(study, "study", "target_failure", required=True),
        _integer(study, "study", "universe_size"),
        _integer(study, "study", "query_count"),
    )

    costs = _section(doc, "costs", required=False)
    _check_keys(costs, "costs", {"base_cost", "worst_case", "exposure_fraction"})
    scenario = doc.get("scenario")
    given = {k for k in costs if costs[k] is not None}
    if scenario is not None:
        if not isinstance(scenario, str) or scenario.lower() not in PRESETS:
            raise ConfigError("scenario", f"unknown preset {scenario!r}; expected one of {sorted(PRESETS)}")
        scenario = scenario.lower()
        clash = sorted(given & {"base_cost", "worst_case"})
        if clash:
            raise ConfigError(f"costs.{clash[0]}", f"conflicts with scenario preset {scenario!r}")
        preset = PRESETS[scenario]
        base_cost, worst_case = preset.base_cost, preset.worst_case
        given |= {"base_cost", "worst_case"}
    else:
        base_cost = _real(costs, "costs", "base_cost", required=True)
        worst_case = _real(costs, "costs", "worst_case", default=0.0)
    profile = _build(
        "costs", CostProfile, base_cost, worst_case,
        _real(costs, "costs", "exposure_fraction", default=0.0),
    )

    budget = _section(doc, "budget", required=True)
    _check_keys(budget, "budget", {"total", "per_person_cap"})
    policy = _build(
        "budget", BudgetPolicy,
        _real(budget, "budget", "total"),
        _real(budget, "budget", "per_person_cap"),
    )

    sides = _section(doc, "sides", required=False)
    _check_keys(sides, "sides", {"n_max", "enforce_group_privacy_floor", "blatant_threshold_params", "eps_max_override"})
    blatant = None
    if sides.get("blatant_threshold_params") is not None:
        bp = sides["blatant_threshold_params"]
        path = "sides.blatant_threshold_params"
        if not isinstance(bp, dict):
            raise ConfigError(path, "must be an object")
        _check_keys(bp, path, {"universe_size", "capture_probability"})
        blatant = BlatantParams(
            _integer(bp, path, "universe_size", required=True),
            _real(bp, path, "capture_probability", required=True),
        )
        _build(path, blatant.ceiling)
    side_constraints = _build(
        "sides", SideConstraints,
        _integer(sides, "sides", "n_max"),
        _flag(sides, "sides", "enforce_group_privacy_floor"),
        blatant,
        _real(sides, "sides", "eps_max_override"),
    )

    delta = _section(doc, "delta", required=False)
    _check_keys(delta, "delta", {"mode", "value", "grid_min", "grid_max", "grid_points", "max_delta_n"})
    default_mode = DeltaMode.SEARCHED if kind is StudyKind.MWEM_APPROX else DeltaMode.PURE
    mode_raw = delta.get("mode", default_mode.value)
    try:
        mode = DeltaMode(str(mode_raw).lower())
    except ValueError:
        raise ConfigError("delta.mode", f"unknown mode {mode_raw!r}; expected pure, fixed or searched") from None
    if mode is DeltaMode.FIXED and "value" not in delta:
        raise ConfigError("delta.value", "is required when mode is 'fixed'")
    defaults = DeltaSearch()
    delta_search = _build(
        "delta", DeltaSearch, mode,
        _real(delta, "delta", "value", default=0.0),
        _real(delta, "delta", "grid_min", default=defaults.grid_min),
        _real(delta, "delta", "grid_max", default=defaults.grid_max),
        _integer(delta, "delta", "grid_points", default=defaults.grid_points),
        _real(delta, "delta", "max_delta_n", default=defaults.max_delta_n),
    )

    problem = _build("delta", FeasibilityProblem, spec, profile, policy, side_constraints, delta_search)
    return PlanConfig(problem, scenario, frozenset(given))


def load_config(path: str | Path) -> PlanConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(doc)
