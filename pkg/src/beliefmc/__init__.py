"""Combined-belief computation over independent evidence sources.

Exact combination folds focal-set tables and enumerates joint outcomes;
the trial engine estimates the same quantities by sampling one outcome per
source, restarting contradictory draws, and counting how often the
surviving intersection settles inside the query set.  A literal-conjunction
logic layer rides on the same trial loop with step-budgeted bounds.
"""

from .errors import (
    BeliefMCError,
    ExcessiveConflictError,
    FrameMismatchError,
    FrameTooLargeError,
    InvalidProblemError,
    ParseError,
    ResourceLimitError,
    TotalConflictError,
)
from .evidence import (
    EvidenceProblem,
    FocalSet,
    Frame,
    MassFunction,
    SimpleSupport,
    SourceModel,
    as_simple_support,
    bel_from_mass,
    focal_intersect,
    mass_from_bel,
    mass_from_source,
    pl_from_mass,
    simple_support,
    validate_problem,
)
from .exact import (
    CombinationResult,
    combine_all,
    combine_pair,
    conflict_exact,
    exact_belief_enumeration,
)
from .logic import (
    AssignmentSpace,
    BoundedEstimate,
    ClauseQuery,
    Literal,
    LogicProblem,
    LogicSource,
    TermSet,
    entails,
    is_contradictory,
    logic_estimate,
    translate_to_set_problem,
    validate_logic_problem,
)
from .mc import (
    Estimate,
    QueryBatch,
    TrialEngineConfig,
    conflict_estimate,
    derive_stream_seed,
    estimate,
    plan_trials,
    run_trial,
    sample_source,
    sd_bound,
    ssf_fast_trial,
    subset_frequency_scan,
)
from .problem_io import (
    GeneratedProblem,
    generate_problem,
    parse_clause,
    parse_problem,
    parse_query,
    render_problem,
    tune_focus_density,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentSpace",
    "BeliefMCError",
    "BoundedEstimate",
    "ClauseQuery",
    "CombinationResult",
    "Estimate",
    "EvidenceProblem",
    "ExcessiveConflictError",
    "FocalSet",
    "Frame",
    "FrameMismatchError",
    "FrameTooLargeError",
    "GeneratedProblem",
    "InvalidProblemError",
    "Literal",
    "LogicProblem",
    "LogicSource",
    "MassFunction",
    "ParseError",
    "QueryBatch",
    "ResourceLimitError",
    "SimpleSupport",
    "SourceModel",
    "TermSet",
    "TotalConflictError",
    "TrialEngineConfig",
    "as_simple_support",
    "bel_from_mass",
    "combine_all",
    "combine_pair",
    "conflict_estimate",
    "conflict_exact",
    "derive_stream_seed",
    "entails",
    "estimate",
    "exact_belief_enumeration",
    "focal_intersect",
    "generate_problem",
    "is_contradictory",
    "logic_estimate",
    "mass_from_bel",
    "mass_from_source",
    "parse_clause",
    "parse_problem",
    "parse_query",
    "pl_from_mass",
    "plan_trials",
    "render_problem",
    "run_trial",
    "sample_source",
    "sd_bound",
    "simple_support",
    "ssf_fast_trial",
    "subset_frequency_scan",
    "translate_to_set_problem",
    "tune_focus_density",
    "validate_logic_problem",
    "validate_problem",
]
