"""Deterministic leveled chase for inclusion and key dependencies.

The engine repairs a finite set of facts against a dependency set by
repeatedly (1) merging facts that violate a key, to exhaustion, and then
(2) applying a single inclusion step, preferring full-width inclusions.
A fact added by an inclusion step sits one level deeper than the fact that
triggered it; facts that collapse under a key merge keep the smaller level.
Every choice point is resolved with the total orders from ``model``, so a
run is a pure function of its input.

A run stops in one of three ways: no rule applies (completed), a key merge
hits two distinct database constants (failed, the repaired instance does
not exist), or a step or level budget is reached (still active).  Cyclic
inclusion sets can grow forever; budgets are how callers carve a finite
prefix out of an infinite object.

Key merges pick, among all applicable pairs, the one whose smaller level is
lowest, then the pair whose ordered fact keys come first, then the key
dependency whose encoding comes first.  Inclusion steps pick the fact at
the lowest level (ties by fact key) among those with an applicable
full-width inclusion, or, when there is none, among those with any
applicable inclusion, and then apply the first applicable inclusion in
encoding order.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from .model import (
    Constant,
    Database,
    DependencySet,
    Fact,
    InclusionDependency,
    KeyDependency,
    Predicate,
    dependency_sort_key,
    fact_sort_key,
    fresh,
)

__all__ = [
    "ChaseStatus",
    "ChaseBudget",
    "ChaseState",
    "ChaseTrace",
    "IdStep",
    "KdStep",
    "StepOutcome",
    "id_applicable",
    "apply_id_rule",
    "kd_applicable",
    "apply_kd_rule",
    "kd_saturate",
    "chase_step",
    "run_chase",
    "resume_chase",
    "replay_trace",
]

FactKey = tuple[Predicate, tuple[Constant, ...]]


class ChaseStatus(enum.Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    FAILED = "failed"


class StepOutcome(enum.Enum):
    APPLIED = "applied"
    COMPLETED = "completed"
    FAILED = "failed"
    BUDGET = "budget"


@dataclass(frozen=True)
class ChaseBudget:
    """Caps on a run.

    ``max_steps`` bounds inclusion applications over the lifetime of the
    state; ``max_level`` bounds the level of any fact the run may create.
    Either cap leaves the state active, marking where the materialized
    prefix ends.
    """

    max_steps: int | None = None
    max_level: int | None = None

    def blocks(self, steps_done: int, child_level: int) -> bool:
        if self.max_steps is not None and steps_done >= self.max_steps:
            return True
        if self.max_level is not None and child_level > self.max_level:
            return True
        return False


@dataclass(frozen=True)
class IdStep:
    """One inclusion application: ``parent`` produced ``created``."""

    dependency: str
    parent: Fact
    created: Fact
    fresh_indices: tuple[int, ...]


@dataclass(frozen=True)
class KdStep:
    """One key merge of ``first`` and ``second``.

    ``substitution`` lists (loser, winner) replacements in application
    order.  ``survivor`` is the collapsed fact, or None when the merge hit
    two distinct database constants at ``failed_position``.
    """

    dependency: str
    first: Fact
    second: Fact
    substitution: tuple[tuple[Constant, Constant], ...]
    survivor: Fact | None
    failed_position: int | None = None
    conflict: tuple[Constant, Constant] | None = None


@dataclass
class ChaseTrace:
    steps: list[IdStep | KdStep] = field(default_factory=list)
    final_status: ChaseStatus = ChaseStatus.ACTIVE


class ChaseState:
    """Mutable fact store driven by the chase; single-owner, not thread-safe.

    Facts live in per-predicate dictionaries keyed by the argument tuple
    with the level as payload, which makes set semantics and the min-level
    merge rule direct.  ``_parent`` links each created fact to the fact its
    inclusion step expanded and survives substitutions, so the derivation
    forest can be rendered afterwards.
    """

    def __init__(self) -> None:
        self._rel: dict[Predicate, dict[tuple[Constant, ...], int]] = {}
        self._parent: dict[FactKey, FactKey] = {}
        self.next_fresh_index: int = 1
        self.status: ChaseStatus = ChaseStatus.ACTIVE
        self.step_count: int = 0
        self.trace: ChaseTrace | None = None
        # Levels strictly below this are fully materialized; None means all.
        self._materialized_below: int | None = 0

    @classmethod
    def from_database(cls, db: Database, keep_trace: bool = False) -> "ChaseState":
        state = cls()
        if keep_trace:
            state.trace = ChaseTrace()
        for f in db.sorted_facts():
            state._rel.setdefault(f.pred, {})[f.args] = 0
        return state

    @classmethod
    def from_facts(
        cls, facts, status: ChaseStatus = ChaseStatus.COMPLETED
    ) -> "ChaseState":
        """State holding exactly ``facts``, for querying hand-built instances."""
        state = cls()
        top = 0
        for f in facts:
            table = state._rel.setdefault(f.pred, {})
            old = table.get(f.args)
            table[f.args] = f.level if old is None else min(old, f.level)
            for a in f.args:
                if a.is_fresh:
                    top = max(top, a.index)
        state.next_fresh_index = top + 1
        state.status = status
        state._materialized_below = None if status is ChaseStatus.COMPLETED else 0
        return state

    # -- access ----------------------------------------------------------

    def fact_level(self, pred: Predicate, args: tuple[Constant, ...]) -> int | None:
        return self._rel.get(pred, {}).get(tuple(args))

    def has_fact(self, pred: Predicate, args: tuple[Constant, ...]) -> bool:
        return self.fact_level(pred, args) is not None

    def fact_count(self) -> int:
        return sum(len(t) for t in self._rel.values())

    def fact_set(self) -> frozenset[Fact]:
        return frozenset(
            Fact(pred, args, level)
            for pred, table in self._rel.items()
            for args, level in table.items()
        )

    def sorted_facts(self, by: str = "name") -> list[Fact]:
        """All facts, ordered by fact key, or by (level, fact key) for ``by='level'``."""
        facts = list(self.fact_set())
        if by == "level":
            facts.sort(key=lambda f: (f.level, fact_sort_key(f)))
        else:
            facts.sort(key=fact_sort_key)
        return facts

    def facts_below(self, level_bound: int) -> list[Fact]:
        return [f for f in self.sorted_facts() if f.level < level_bound]

    def parent_of(self, fact: Fact) -> Fact | None:
        key = self._parent.get((fact.pred, fact.args))
        if key is None:
            return None
        level = self.fact_level(*key)
        assert level is not None
        return Fact(key[0], key[1], level)

    def queryable_level_bound(self) -> int | None:
        """Largest L such that the prefix of levels < L is fully built.

        None means unbounded (a completed chase).  A freshly created or
        budget-cut active state reports the bound recorded at the last
        stop, conservatively 0 if it never ran.
        """
        if self.status is ChaseStatus.COMPLETED:
            return None
        return self._materialized_below or 0

    def content_snapshot(self) -> tuple:
        """Comparable digest: status, facts with levels, fresh counter, steps."""
        facts = tuple(
            (f.pred.name, tuple(a.sort_key() for a in f.args), f.level)
            for f in self.sorted_facts()
        )
        return (self.status, facts, self.next_fresh_index, self.step_count)

    def copy(self) -> "ChaseState":
        dup = ChaseState()
        dup._rel = {pred: dict(table) for pred, table in self._rel.items()}
        dup._parent = dict(self._parent)
        dup.next_fresh_index = self.next_fresh_index
        dup.status = self.status
        dup.step_count = self.step_count
        dup._materialized_below = self._materialized_below
        if self.trace is not None:
            dup.trace = ChaseTrace(list(self.trace.steps), self.trace.final_status)
        return dup

    # -- mutation --------------------------------------------------------

    def _add_fact(self, pred: Predicate, args: tuple[Constant, ...], level: int) -> None:
        self._rel.setdefault(pred, {})[args] = level

    def _substitute(self, loser: Constant, winner: Constant) -> None:
        """Replace ``loser`` by ``winner`` in every fact.

        Facts that become identical collapse to the smaller level; on a
        level tie the entry whose original key sorts first wins, which only
        matters for the parent pointer.
        """
        new_rel: dict[Predicate, dict[tuple[Constant, ...], int]] = {}
        owner: dict[FactKey, FactKey] = {}
        for pred in self._rel:
            table = self._rel[pred]
            new_table: dict[tuple[Constant, ...], int] = {}
            for args in sorted(table, key=lambda t: tuple(a.sort_key() for a in t)):
                level = table[args]
                nargs = tuple(winner if a == loser else a for a in args)
                if nargs in new_table:
                    if level < new_table[nargs]:
                        new_table[nargs] = level
                        owner[(pred, nargs)] = (pred, args)
                else:
                    new_table[nargs] = level
                    owner[(pred, nargs)] = (pred, args)
            if new_table:
                new_rel[pred] = new_table
        new_parent: dict[FactKey, FactKey] = {}
        for new_key, old_key in owner.items():
            old_parent = self._parent.get(old_key)
            if old_parent is not None:
                ppred, pargs = old_parent
                new_parent[new_key] = (
                    ppred,
                    tuple(winner if a == loser else a for a in pargs),
                )
        self._rel = new_rel
        self._parent = new_parent


# -- chase rules -----------------------------------------------------------


def id_applicable(state: ChaseState, fact: Fact, dep: InclusionDependency) -> bool:
    """True when no fact over ``dep.rhs_pred`` witnesses ``fact``'s projection."""
    if fact.pred != dep.lhs_pred:
        raise ValueError(f"{fact!r} is not over {dep.lhs_pred!r}")
    needed = tuple(fact.args[i - 1] for i in dep.lhs_attrs)
    for args in state._rel.get(dep.rhs_pred, {}):
        if tuple(args[i - 1] for i in dep.rhs_attrs) == needed:
            return False
    return True


def apply_id_rule(state: ChaseState, fact: Fact, dep: InclusionDependency) -> Fact:
    """Add the witness fact for ``fact`` under ``dep`` at ``fact.level + 1``.

    Positions of the right-hand predicate outside the dependency's attribute
    list are filled left to right with new fresh constants.
    """
    if not id_applicable(state, fact, dep):
        raise ValueError(f"inclusion {dep!r} is not applicable to {fact!r}")
    slots: list[Constant | None] = [None] * dep.rhs_pred.arity
    for lpos, rpos in zip(dep.lhs_attrs, dep.rhs_attrs):
        slots[rpos - 1] = fact.args[lpos - 1]
    fresh_used: list[int] = []
    for i, value in enumerate(slots):
        if value is None:
            slots[i] = fresh(state.next_fresh_index)
            fresh_used.append(state.next_fresh_index)
            state.next_fresh_index += 1
    created = Fact(dep.rhs_pred, tuple(slots), fact.level + 1)  # type: ignore[arg-type]
    state._add_fact(created.pred, created.args, created.level)
    state._parent[(created.pred, created.args)] = (fact.pred, fact.args)
    state.step_count += 1
    if state.trace is not None:
        state.trace.steps.append(
            IdStep(dep.encode(), fact, created, tuple(fresh_used))
        )
    return created


def kd_applicable(state: ChaseState, t1: Fact, t2: Fact, kd: KeyDependency) -> bool:
    """True when the two distinct facts agree on every key position."""
    if t1.pred != kd.pred or t2.pred != kd.pred:
        raise ValueError("both facts must be over the key's predicate")
    if t1.args == t2.args:
        return False
    return all(t1.args[i - 1] == t2.args[i - 1] for i in kd.key_attrs)


def apply_kd_rule(state: ChaseState, t1: Fact, t2: Fact, kd: KeyDependency) -> None:
    """Merge the non-key symbols of ``t1`` and ``t2`` and collapse the pair.

    Position by position: two distinct database constants fail the chase;
    a database constant beats a fresh one; of two fresh constants the
    order-smaller survives.  Each replacement is applied to every fact
    before the next position is examined, so chained merges resolve to the
    final symbol.  The collapsed fact keeps the smaller level, as does any
    other pair of facts made identical along the way.
    """
    if not kd_applicable(state, t1, t2, kd):
        raise ValueError(f"key {kd!r} is not applicable to {t1!r}, {t2!r}")
    cur1, cur2 = list(t1.args), list(t2.args)
    pairs: list[tuple[Constant, Constant]] = []
    for pos in kd.nonkey_attrs:
        a, b = cur1[pos - 1], cur2[pos - 1]
        if a == b:
            continue
        if not a.is_fresh and not b.is_fresh:
            state.status = ChaseStatus.FAILED
            if state.trace is not None:
                state.trace.steps.append(
                    KdStep(
                        kd.encode(), t1, t2, tuple(pairs), None,
                        failed_position=pos, conflict=(a, b),
                    )
                )
                state.trace.final_status = ChaseStatus.FAILED
            return
        if not a.is_fresh:
            winner, loser = a, b
        elif not b.is_fresh:
            winner, loser = b, a
        else:
            winner, loser = (a, b) if a.index < b.index else (b, a)
        pairs.append((loser, winner))
        state._substitute(loser, winner)
        cur1 = [winner if c == loser else c for c in cur1]
        cur2 = [winner if c == loser else c for c in cur2]
    merged_args = tuple(cur1)
    level = state.fact_level(kd.pred, merged_args)
    assert level is not None
    if state.trace is not None:
        state.trace.steps.append(
            KdStep(kd.encode(), t1, t2, tuple(pairs), Fact(kd.pred, merged_args, level))
        )


def _select_kd_application(
    state: ChaseState, kds
) -> tuple[Fact, Fact, KeyDependency] | None:
    best = None
    best_key = None
    for kd in sorted(kds, key=dependency_sort_key):
        table = state._rel.get(kd.pred, {})
        groups: dict[tuple, list[tuple[Constant, ...]]] = {}
        for args in table:
            proj = tuple(args[i - 1] for i in kd.sorted_attrs)
            groups.setdefault(proj, []).append(args)
        for members in groups.values():
            if len(members) < 2:
                continue
            members.sort(key=lambda t: tuple(a.sort_key() for a in t))
            for a1, a2 in itertools.combinations(members, 2):
                f1 = Fact(kd.pred, a1, table[a1])
                f2 = Fact(kd.pred, a2, table[a2])
                cand_key = (
                    min(f1.level, f2.level),
                    (fact_sort_key(f1), fact_sort_key(f2)),
                    dependency_sort_key(kd),
                )
                if best_key is None or cand_key < best_key:
                    best_key = cand_key
                    best = (f1, f2, kd)
    return best


def kd_saturate(state: ChaseState, kds) -> None:
    """Apply key merges until none is applicable or the chase fails."""
    while state.status is ChaseStatus.ACTIVE:
        picked = _select_kd_application(state, kds)
        if picked is None:
            return
        apply_kd_rule(state, *picked)


def _select_id_application(
    state: ChaseState, deps: DependencySet
) -> tuple[Fact, InclusionDependency] | None:
    full_width = deps.full_width_ids()
    all_ids = deps.sorted_ids()
    for subset in (full_width, all_ids):
        if not subset:
            continue
        by_lhs: dict[Predicate, list[InclusionDependency]] = {}
        for dep in subset:
            by_lhs.setdefault(dep.lhs_pred, []).append(dep)
        for fact in state.sorted_facts(by="level"):
            for dep in by_lhs.get(fact.pred, ()):
                if id_applicable(state, fact, dep):
                    return fact, dep
    return None


def _min_pending_child_level(state: ChaseState, deps: DependencySet) -> int | None:
    """Level of the shallowest fact an applicable inclusion would still create."""
    best: int | None = None
    by_lhs: dict[Predicate, list[InclusionDependency]] = {}
    for dep in deps.sorted_ids():
        by_lhs.setdefault(dep.lhs_pred, []).append(dep)
    for fact in state.sorted_facts(by="level"):
        if best is not None and fact.level + 1 >= best:
            break
        for dep in by_lhs.get(fact.pred, ()):
            if id_applicable(state, fact, dep):
                best = fact.level + 1
                break
    return best


def chase_step(
    state: ChaseState, deps: DependencySet, budget: ChaseBudget | None = None
) -> StepOutcome:
    """One scheduler iteration: saturate key merges, then at most one inclusion."""
    if state.status is ChaseStatus.FAILED:
        return StepOutcome.FAILED
    if state.status is ChaseStatus.COMPLETED:
        return StepOutcome.COMPLETED
    kd_saturate(state, deps.kds)
    if state.status is ChaseStatus.FAILED:
        return StepOutcome.FAILED
    selected = _select_id_application(state, deps)
    if selected is None:
        state.status = ChaseStatus.COMPLETED
        state._materialized_below = None
        if state.trace is not None:
            state.trace.final_status = ChaseStatus.COMPLETED
        return StepOutcome.COMPLETED
    fact, dep = selected
    if budget is not None and budget.blocks(state.step_count, fact.level + 1):
        state._materialized_below = _min_pending_child_level(state, deps)
        if state.trace is not None:
            state.trace.final_status = ChaseStatus.ACTIVE
        return StepOutcome.BUDGET
    apply_id_rule(state, fact, dep)
    return StepOutcome.APPLIED


def resume_chase(
    state: ChaseState, deps: DependencySet, budget: ChaseBudget | None = None
) -> ChaseState:
    """Continue a chase until completion, failure, or budget exhaustion."""
    while chase_step(state, deps, budget) is StepOutcome.APPLIED:
        pass
    return state


def run_chase(
    db: Database,
    deps: DependencySet,
    budget: ChaseBudget | None = None,
    keep_trace: bool = False,
) -> ChaseState:
    """Chase ``db`` under ``deps``; deterministic for fixed inputs."""
    return resume_chase(ChaseState.from_database(db, keep_trace), deps, budget)


def replay_trace(db: Database, trace: ChaseTrace) -> ChaseState:
    """Mechanically re-apply a recorded run, making no scheduling decisions."""
    state = ChaseState.from_database(db)
    for step in trace.steps:
        if isinstance(step, IdStep):
            created = step.created
            state._add_fact(created.pred, created.args, created.level)
            state._parent[(created.pred, created.args)] = (
                step.parent.pred,
                step.parent.args,
            )
            if step.fresh_indices:
                state.next_fresh_index = max(
                    state.next_fresh_index, max(step.fresh_indices) + 1
                )
            state.step_count += 1
        else:
            for loser, winner in step.substitution:
                state._substitute(loser, winner)
            if step.failed_position is not None:
                break
    state.status = trace.final_status
    if state.status is ChaseStatus.COMPLETED:
        state._materialized_below = None
    return state
