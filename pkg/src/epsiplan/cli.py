"""Command-line entry point: ``epsiplan {plan,compare,region,simulate} CONFIG``.

Results go to stdout as JSON (CSV for ``region``); a short human summary goes
to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Any, Sequence

from epsiplan import economics
from epsiplan.accuracy import PrivacyLevel, StudyKind, mean_min_n
from epsiplan.config import ConfigError, PlanConfig, load_config
from epsiplan.economics import BudgetPolicy
from epsiplan.feasibility import (
    FeasibilityOutcome,
    FeasibilityProblem,
    Status,
    region_export,
    solve,
    verify_point,
)
from epsiplan.simulation import MIN_TRIALS, SimulationConfig, Verdict, run_mean_study

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_UNDETERMINED = 3


class UsageError(Exception):
    pass


def _clean(obj: Any) -> Any:
    """Make ``obj`` strict-JSON safe: non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _outcome_doc(outcome: FeasibilityOutcome) -> dict[str, Any]:
    p = outcome.point
    return {
        "status": outcome.status.value,
        "epsilon": p.epsilon if p else None,
        "delta": p.delta if p else None,
        "n": p.n if p else None,
        "per_person_payment": outcome.per_person_payment,
        "total_cost": outcome.total_cost,
        "diagnostics": [d.as_dict() for d in outcome.diagnostics],
        "search": outcome.search_trace_summary,
    }


def _checked_solve(problem: FeasibilityProblem) -> FeasibilityOutcome:
    outcome = solve(problem)
    if outcome.feasible:
        # independent of the solver's own check; never print an unverified point
        recheck = verify_point(problem, outcome.point)
        if not all(r.satisfied for r in recheck):
            outcome.status = Status.UNDETERMINED
            outcome.diagnostics = recheck
            outcome.search_trace_summary["error"] = "point failed re-validation before output"
    return outcome


def cmd_plan(cfg: PlanConfig, args: argparse.Namespace) -> int:
    outcome = _checked_solve(cfg.problem)
    _emit(_outcome_doc(outcome))
    if outcome.feasible:
        p = outcome.point
        delta = f", delta={p.delta:g}" if p.delta else ""
        _say(f"feasible: epsilon={p.epsilon:.6g}{delta}, N={p.n}, "
             f"pay {outcome.per_person_payment:.6g} each, total {outcome.total_cost:.6g}")
        return EXIT_OK
    if outcome.status is Status.INFEASIBLE:
        failed = [d.name for d in outcome.diagnostics if not d.satisfied]
        _say("infeasible" + (f" (closest probe violates: {', '.join(failed)})" if failed else ""))
        return EXIT_NEGATIVE
    _say("undetermined: " + str(outcome.search_trace_summary.get("error", "solver could not decide")))
    return EXIT_UNDETERMINED


def cmd_compare(cfg: PlanConfig, args: argparse.Namespace) -> int:
    spec, profile = cfg.spec, cfg.problem.profile
    if spec.kind is not StudyKind.MEAN_ESTIMATION:
        raise UsageError("compare supports mean_estimation studies only")
    missing = [k for k in ("worst_case", "exposure_fraction") if k not in cfg.cost_fields]
    if missing:
        raise ConfigError(f"costs.{missing[0]}", "is required for compare")

    np_size = economics.nonprivate_min_n(spec)
    np_budget = economics.nonprivate_budget(spec, profile)
    rhs = economics.private_cheaper_rhs(spec, profile)
    cheaper = economics.private_cheaper(spec, profile)

    ref_eps, ref_n = spec.target_error / 6.0, mean_min_n(spec)
    ref_cost = economics.marginal_cost(PrivacyLevel(ref_eps), profile) * ref_n

    private_min_cost = None
    private_point = None
    if np_budget > 0:
        problem = FeasibilityProblem(spec, profile, BudgetPolicy(total=np_budget),
                                     cfg.problem.sides, cfg.problem.delta)
        outcome = _checked_solve(problem)
        if outcome.feasible:
            private_min_cost = outcome.total_cost
            private_point = {"epsilon": outcome.point.epsilon, "n": outcome.point.n}

    if cheaper:
        verdict = "private_cheaper_by_condition"
    elif private_min_cost is not None:
        verdict = "private_cheaper_by_solver"
    else:
        verdict = "private_not_feasible_within_nonprivate_budget"
    _emit({
        "private_sufficiently_cheaper": cheaper,
        "condition_lhs": ref_eps,
        "condition_rhs": rhs,
        "nonprivate_n_bound": np_size.bound,
        "nonprivate_n": np_size.n,
        "nonprivate_budget": np_budget,
        "private_reference": {"epsilon": ref_eps, "n": ref_n, "total_cost": ref_cost},
        "private_min_cost": private_min_cost,
        "private_point": private_point,
        "verdict": verdict,
    })
    cheapest = "none" if private_min_cost is None else f"{private_min_cost:.6g}"
    _say(f"non-private: N' >= {np_size.bound:.4g}, budget {np_budget:.6g}; "
         f"cheapest private study within it: {cheapest}; {verdict}")
    return EXIT_OK


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def cmd_region(cfg: PlanConfig, args: argparse.Namespace) -> int:
    if args.samples < 2:
        raise UsageError(f"--samples must be >= 2, got {args.samples}")
    rows = region_export(cfg.problem, args.samples)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "eps_accuracy_min", "eps_budget_max"])
    for r in rows:
        writer.writerow([r.n, _fmt(r.eps_accuracy_min), _fmt(r.eps_budget_max)])
    _say(f"{len(rows)} rows, N from {rows[0].n if rows else '-'} to {rows[-1].n if rows else '-'}")
    return EXIT_OK


def cmd_simulate(cfg: PlanConfig, args: argparse.Namespace) -> int:
    spec = cfg.spec
    if spec.kind is not StudyKind.MEAN_ESTIMATION:
        raise UsageError("simulate supports mean_estimation studies only")
    if args.trials < MIN_TRIALS:
        raise UsageError(f"--trials must be >= {MIN_TRIALS}, got {args.trials}")
    if (args.epsilon is None) != (args.n is None):
        raise UsageError("give both --epsilon and --n, or neither to use the plan point")
    if args.epsilon is None:
        outcome = _checked_solve(cfg.problem)
        if not outcome.feasible:
            raise UsageError(f"no point to simulate: plan status is {outcome.status.value}")
        epsilon, n, source = outcome.point.epsilon, outcome.point.n, "plan"
    else:
        epsilon, n, source = args.epsilon, args.n, "flags"
    try:
        sim = SimulationConfig(args.mu, n, epsilon, spec.target_error, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = run_mean_study(sim, backend=args.backend, workers=args.workers)
    doc = report.as_dict()
    doc.update(point_source=source, epsilon=epsilon, n=n, population_mean=args.mu, seed=args.seed)
    _emit(doc)
    _say(f"{report.failures}/{report.trials} failures (rate {report.empirical_rate:.4g}) "
         f"vs bound {report.analytic_bound.value:.4g}: {report.verdict.value}")
    return EXIT_OK if report.verdict is Verdict.CONSISTENT else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epsiplan", description="Plan differentially private studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="cheapest feasible (epsilon, delta, N)")
    p.add_argument("config")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compare", help="private vs non-private study cost")
    p.add_argument("config")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("region", help="feasible-region curves as CSV")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=50)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="Monte Carlo check of the failure bound")
    p.add_argument("config")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--backend", choices=("numba", "numpy"))
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except (ConfigError, UsageError) as exc:
        _say(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
