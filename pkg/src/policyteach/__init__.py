"""Machine teaching of grid-world reward policies.

The package selects small sets of demonstrations that convey a reward
function to an observer who reasons by inverse reinforcement learning,
scores how hard held-out test environments are for the resulting belief,
and serves the whole thing as a sealed session bundle.
"""

from .assessment import (
    TestItem,
    TestSuite,
    build_test_suite,
    extended_bec,
    score_response,
    simulate_learner,
    test_difficulty,
    tier_accuracy,
    trajectory_from_actions,
)
from .beliefs import (
    AreaEstimate,
    BeliefRegion,
    estimate_area,
    estimate_overlap,
    information_gain,
    sample_belief,
)
from .bundle import build_session, check_pairing, read_json, verify_integrity, write_json
from .constraints import (
    ConstraintSet,
    demo_constraints_counterfactual,
    demo_constraints_standard,
    minimal_constraint_set,
    policy_bec,
)
from .curriculum import (
    Curriculum,
    CurriculumStep,
    action_negative_prior,
    candidate_pool,
    full_sphere_prior,
    select_baseline_curriculum,
    select_counterfactual_curriculum,
    select_feature_scaffolded,
    sign_orthant_prior,
)
from .domains import (
    BUILTIN_NAMES,
    builtin_domain,
    load_domain,
    resolve_domain,
    serialize_domain,
)
from .errors import (
    ChecksumMismatch,
    ConfigurationError,
    CycleDetected,
    DegenerateClusters,
    DegenerateRegion,
    DomainMismatch,
    EmptyPool,
    InfeasibleComputation,
    InvalidTrajectory,
    NonTerminating,
    PolicyTeachError,
    PoolTooSmall,
    SchemaError,
    SemanticError,
    Unreachable,
)
from .mdp import (
    Demonstration,
    Domain,
    GridEnvironment,
    Trajectory,
    enumerate_candidate_demos,
    optimal_demo,
    rollout,
    solve_cached,
    solve_optimal_policy,
)
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "AreaEstimate",
    "BUILTIN_NAMES",
    "BeliefRegion",
    "ChecksumMismatch",
    "ConfigurationError",
    "ConstraintSet",
    "Curriculum",
    "CurriculumStep",
    "CycleDetected",
    "DegenerateClusters",
    "DegenerateRegion",
    "Demonstration",
    "Domain",
    "DomainMismatch",
    "EmptyPool",
    "GridEnvironment",
    "InfeasibleComputation",
    "InvalidTrajectory",
    "NonTerminating",
    "PolicyTeachError",
    "PoolTooSmall",
    "SchemaError",
    "SemanticError",
    "TestItem",
    "TestSuite",
    "Trajectory",
    "Unreachable",
    "action_negative_prior",
    "build_session",
    "build_test_suite",
    "builtin_domain",
    "candidate_pool",
    "check_pairing",
    "create_app",
    "demo_constraints_counterfactual",
    "demo_constraints_standard",
    "enumerate_candidate_demos",
    "estimate_area",
    "estimate_overlap",
    "extended_bec",
    "full_sphere_prior",
    "information_gain",
    "load_domain",
    "minimal_constraint_set",
    "optimal_demo",
    "policy_bec",
    "read_json",
    "resolve_domain",
    "rollout",
    "sample_belief",
    "score_response",
    "select_baseline_curriculum",
    "select_counterfactual_curriculum",
    "select_feature_scaffolded",
    "serialize_domain",
    "sign_orthant_prior",
    "simulate_learner",
    "solve_cached",
    "solve_optimal_policy",
    "test_difficulty",
    "tier_accuracy",
    "trajectory_from_actions",
    "verify_integrity",
    "write_json",
]
