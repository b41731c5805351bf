"""A dependency and database family whose chase pushes initial constants to
depths that grow with the database, refuting any data-independent bound on
the chase prefix needed for query answering.

The schema has two entities ``e`` and ``eprime`` and two binary
relationships ``r`` and ``s``, with ``s`` keyed on its first position and a
cycle between ``e`` and ``r``.  The instance for size n is

    e(1), s(1,2), s(2,3), ..., s(n-1,n)

with the numerals rendered as zero-padded strings so byte order equals
numeric order.  Chasing walks the s-chain: producing e(i) from e(i-1) costs
two inclusion steps, one key merge that pulls the fresh placeholder back to
the database constant i, and one more inclusion step, so e(i) lands at
level 2(i-1) and the constant n, present at level 0, reappears at level
2n-2.  Both the query-relevant prefix depth and the constant propagation
gap therefore scale with n, which is exactly what this module measures.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chase import ChaseBudget, ChaseState, ChaseStatus, resume_chase, run_chase
from .model import (
    Database,
    DependencySet,
    Fact,
    InclusionDependency,
    KeyDependency,
    Predicate,
    Schema,
    dom,
    fact_sort_key,
)
from .query import AnswerSet, ConjunctiveQuery, Atom, Var, evaluate_over_prefix

__all__ = [
    "E",
    "EPRIME",
    "R",
    "S",
    "constant_label",
    "build_counterexample",
    "membership_query",
    "GrowthReport",
    "profile_levels",
    "RefutationVerdict",
    "refute_constant_bounds",
    "StabilityReport",
    "check_lower_level_stability",
]

E = Predicate("e", 1)
EPRIME = Predicate("eprime", 1)
R = Predicate("r", 2)
S = Predicate("s", 2)


def constant_label(i: int, n: int) -> str:
    """Zero-padded decimal label for constant ``i`` in the size-n instance."""
    return str(i).zfill(len(str(n)))


def build_counterexample(n: int) -> tuple[Schema, DependencySet, Database]:
    """Schema, dependencies, and the size-n instance; requires n >= 2."""
    if n < 2:
        raise ValueError("the construction needs n >= 2")
    schema = Schema([E, EPRIME, R, S])
    deps = DependencySet(
        ids=(
            InclusionDependency(R, E, (1,), (1,)),
            InclusionDependency(R, E, (2,), (1,)),
            InclusionDependency(R, S, (1, 2), (1, 2)),
            InclusionDependency(E, R, (1,), (1,)),
            InclusionDependency(S, EPRIME, (2,), (1,)),
            InclusionDependency(S, EPRIME, (1,), (1,)),
        ),
        kds=(KeyDependency(S, frozenset({1})),),
    )
    facts = [Fact(E, (dom(constant_label(1, n)),), 0)]
    for i in range(2, n + 1):
        facts.append(
            Fact(S, (dom(constant_label(i - 1, n)), dom(constant_label(i, n))), 0)
        )
    return schema, deps, Database.of(facts)


def membership_query() -> ConjunctiveQuery:
    """q(X) :- e(X), the probe used by the refutation."""
    x = Var("X")
    return ConjunctiveQuery((x,), (Atom(E, (x,)),))


@dataclass(frozen=True)
class GrowthReport:
    """Where each database constant shows up in the chase of the size-n instance.

    ``first_level_of_e_fact[i]`` is the level of the fact e(i);
    ``max_level_of_constant[i]`` the deepest materialized fact containing i;
    ``probe_level`` is 2n-2, and ``delta_witness`` pairs a level-0 fact
    containing n with a fact at level 2n-2 containing n.
    """

    n: int
    first_level_of_e_fact: dict[int, int]
    max_level_of_constant: dict[int, int]
    probe_level: int
    delta_witness: tuple[Fact, Fact]

    @property
    def gap(self) -> int:
        low, high = self.delta_witness
        return high.level - low.level


def profile_levels(chase: ChaseState, n: int) -> GrowthReport:
    """Measure constant depths; refuses a prefix shallower than level 2n-2."""
    probe = 2 * n - 2
    built = chase.queryable_level_bound()
    if chase.status is not ChaseStatus.COMPLETED and (built is None or built <= probe):
        raise ValueError(
            f"chase must be materialized at least through level {probe}"
        )
    labels = {i: dom(constant_label(i, n)) for i in range(1, n + 1)}
    e_levels: dict[int, int] = {}
    for i, c in labels.items():
        level = chase.fact_level(E, (c,))
        if level is None:
            raise ValueError(f"fact e({c.render()}) is missing from the chase")
        e_levels[i] = level
    max_levels: dict[int, int] = {i: 0 for i in labels}
    facts = chase.sorted_facts()
    for f in facts:
        for i, c in labels.items():
            if c in f.args:
                max_levels[i] = max(max_levels[i], f.level)
    target = labels[n]
    low_candidates = [f for f in facts if f.level == 0 and target in f.args]
    high_candidates = [f for f in facts if f.level == probe and target in f.args]
    if not low_candidates or not high_candidates:
        raise ValueError(f"constant {target.render()} lacks a level-0 or level-{probe} fact")
    witness = (
        min(low_candidates, key=fact_sort_key),
        min(high_candidates, key=fact_sort_key),
    )
    return GrowthReport(n, e_levels, max_levels, probe, witness)


@dataclass(frozen=True)
class RefutationVerdict:
    """Outcome of the two bound refutations for one instance size.

    The prefix below ``probe_level`` must miss the tuple <n> that the prefix
    one level deeper contains, and constant n must sit both at level 0 and
    at level 2n-2.  ``holds`` is True when the engine agrees on all points.
    """

    n: int
    probe_level: int
    answers_at_probe: AnswerSet
    answers_above_probe: AnswerSet
    excluded_at_probe: bool
    included_above_probe: bool
    gap: int
    report: GrowthReport

    @property
    def holds(self) -> bool:
        return (
            self.excluded_at_probe
            and self.included_above_probe
            and self.gap == self.probe_level
        )


def refute_constant_bounds(n: int, slack_levels: int = 2) -> RefutationVerdict:
    """Build, chase through level 2n-2 plus slack, and measure both refutations."""
    _, deps, db = build_counterexample(n)
    probe = 2 * n - 2
    state = run_chase(db, deps, ChaseBudget(max_level=probe + slack_levels))
    report = profile_levels(state, n)
    query = membership_query()
    answers_lo = evaluate_over_prefix(state, query, probe)
    answers_hi = evaluate_over_prefix(state, query, probe + 1)
    target = (dom(constant_label(n, n)),)
    return RefutationVerdict(
        n=n,
        probe_level=probe,
        answers_at_probe=answers_lo,
        answers_above_probe=answers_hi,
        excluded_at_probe=target not in answers_lo,
        included_above_probe=target in answers_hi,
        gap=report.gap,
        report=report,
    )


@dataclass(frozen=True)
class StabilityReport:
    """Whether levels below 2n-2 survive further chasing unchanged."""

    n: int
    probe_level: int
    extra_steps: int
    stable: bool
    changed: frozenset[Fact]


def check_lower_level_stability(n: int, extra_steps: int | None = None) -> StabilityReport:
    """Chase until e(n) exists, then keep going and diff the low levels.

    The continuation budget defaults to 4n further inclusion steps, enough
    for several full production cycles beyond e(n).
    """
    _, deps, db = build_counterexample(n)
    probe = 2 * n - 2
    state = run_chase(db, deps, ChaseBudget(max_level=probe))
    before = frozenset(f for f in state.fact_set() if f.level < probe)
    extra = 4 * n if extra_steps is None else extra_steps
    resume_chase(state, deps, ChaseBudget(max_steps=state.step_count + extra))
    after = frozenset(f for f in state.fact_set() if f.level < probe)
    return StabilityReport(
        n=n,
        probe_level=probe,
        extra_steps=extra,
        stable=before == after,
        changed=before ^ after,
    )
