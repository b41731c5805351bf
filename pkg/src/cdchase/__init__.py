"""Deterministic leveled chase for key and inclusion dependencies.

The package validates that a dependency set encodes an extended
entity-relationship schema, chases incomplete instances into a leveled
representative of all their models, answers conjunctive queries with
certain-answer semantics over level-bounded chase prefixes, checks query
containment by freezing and chasing, and ships an executable experiment
showing that the prefix depth needed for query answering grows with the
size of the data.
"""

from .model import (
    Constant,
    Database,
    Dependency,
    DependencySet,
    Fact,
    InclusionDependency,
    KeyDependency,
    Predicate,
    Schema,
    compare_constants,
    dependency_sort_key,
    dom,
    fact_sort_key,
    fresh,
)
from .chase import (
    ChaseBudget,
    ChaseState,
    ChaseStatus,
    ChaseTrace,
    IdStep,
    KdStep,
    StepOutcome,
    apply_id_rule,
    apply_kd_rule,
    chase_step,
    id_applicable,
    kd_applicable,
    kd_saturate,
    replay_trace,
    resume_chase,
    run_chase,
)
from .validator import (
    CdCondition,
    CdPartition,
    CdViolation,
    is_cyclic,
    is_full_width,
    partition_violations,
    validate_cd_set,
)
from .query import (
    AnswerSet,
    Atom,
    ConjunctiveQuery,
    ContainmentResult,
    ContainmentVerdict,
    FailedChaseError,
    PrefixNotMaterializedError,
    Var,
    brute_force_evaluate,
    check_containment,
    evaluate_over_prefix,
    find_homomorphisms,
    freeze_query,
)
from .counterexample import (
    GrowthReport,
    RefutationVerdict,
    StabilityReport,
    build_counterexample,
    check_lower_level_stability,
    constant_label,
    membership_query,
    profile_levels,
    refute_constant_bounds,
)
from .dsl import (
    ParseError,
    parse_database,
    parse_dependencies,
    parse_queries,
    parse_query,
    parse_schema,
    serialize_database,
    serialize_dependencies,
    serialize_query,
    serialize_schema,
)

__version__ = "0.1.0"
