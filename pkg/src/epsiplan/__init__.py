"""Plan differentially private studies: accuracy, participant cost and budget."""
from epsiplan.accuracy import (
    EpsilonWindow,
    PrivacyLevel,
    StudyKind,
    StudySpec,
    failure_bound,
    mean_epsilon_at_n,
    mean_epsilon_window,
    mean_failure_bound,
    mean_max_base_cost,
    mean_min_n,
    mwem_approx_failure,
    mwem_pure_failure,
)
from epsiplan.dp_core import (
    LaplaceScale,
    ProbabilityBound,
    chernoff_lower,
    chernoff_upper,
    laplace_sample,
    laplace_tail,
)
from epsiplan.economics import (
    BudgetPolicy,
    CostProfile,
    budget_satisfied,
    expected_cost_bounds,
    marginal_cost,
    nonprivate_budget,
    nonprivate_min_n,
    private_cheaper,
)
from epsiplan.feasibility import (
    BlatantParams,
    DeltaMode,
    DeltaSearch,
    FeasibilityOutcome,
    FeasibilityProblem,
    Point,
    SideConstraints,
    Status,
    blatant_epsilon_ceiling,
    group_privacy_floor,
    region_export,
    solve,
    verify_point,
)
from epsiplan.simulation import (
    SimulationConfig,
    SimulationReport,
    Verdict,
    run_mean_study,
    verify_laplace_moments,
)

__version__ = "0.1.0"
