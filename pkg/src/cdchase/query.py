"""Conjunctive queries over chase prefixes.

Evaluation is homomorphism search: an answer is the head image of an
assignment of body variables to constants under which every body atom is a
fact of the instance.  Answers never contain fresh constants; a fresh
constant is a placeholder, not a value the query may return.

Answers computed over a level-bounded prefix of a chase are sound but
possibly incomplete certain answers.  How deep a prefix must be for
completeness depends on the data, not just on the dependencies, so every
answer set carries the level bound it was computed under.

Containment of one query in another under a dependency set is checked by
freezing the candidate subsumer: its variables become reserved database
constants, its body becomes an initial instance, and the instance is chased.
Containment up to a level bound holds when the other query's body maps into
the chase prefix with its head landing on the frozen head.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .chase import ChaseBudget, ChaseState, ChaseStatus, run_chase
from .model import (
    Constant,
    Database,
    DependencySet,
    Fact,
    Predicate,
    dom,
    fact_sort_key,
)

__all__ = [
    "Var",
    "Term",
    "Atom",
    "ConjunctiveQuery",
    "AnswerSet",
    "FailedChaseError",
    "PrefixNotMaterializedError",
    "find_homomorphisms",
    "evaluate_over_prefix",
    "brute_force_evaluate",
    "freeze_query",
    "ContainmentVerdict",
    "ContainmentResult",
    "check_containment",
]

FROZEN_PREFIX = "_frz"


class FailedChaseError(ValueError):
    """Raised when querying a chase that failed (inconsistent database)."""


class PrefixNotMaterializedError(ValueError):
    """Raised when a level bound exceeds the materialized part of a chase."""


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return self.name


Term = Union[Var, Constant]


@dataclass(frozen=True, slots=True)
class Atom:
    pred: Predicate
    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) != self.pred.arity:
            raise ValueError(
                f"{self.pred!r} takes {self.pred.arity} terms, got {len(self.terms)}"
            )

    def render(self) -> str:
        return f"{self.pred.name}({','.join(map(repr, self.terms))})"

    def __repr__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class ConjunctiveQuery:
    """head(head_vars) :- body.  Every head variable must occur in the body."""

    head: tuple[Var, ...]
    body: tuple[Atom, ...]
    name: str = "q"

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", tuple(self.head))
        object.__setattr__(self, "body", tuple(self.body))
        if not self.body:
            raise ValueError("query body must be non-empty")
        body_vars = set(self.variables())
        for v in self.head:
            if not isinstance(v, Var):
                raise ValueError("head terms must be variables")
            if v not in body_vars:
                raise ValueError(f"head variable {v!r} does not occur in the body")

    def variables(self) -> tuple[Var, ...]:
        """Distinct body variables in order of first occurrence."""
        seen: dict[Var, None] = {}
        for atom in self.body:
            for term in atom.terms:
                if isinstance(term, Var):
                    seen.setdefault(term)
        return tuple(seen)

    def render(self) -> str:
        head = ",".join(v.name for v in self.head)
        body = ", ".join(a.render() for a in self.body)
        return f"{self.name}({head}) :- {body}."

    def __repr__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class AnswerSet:
    """Tuples of database constants; ``level_bound`` is None for unbounded."""

    tuples: frozenset[tuple[Constant, ...]]
    level_bound: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tuples", frozenset(self.tuples))
        for t in self.tuples:
            if any(c.is_fresh for c in t):
                raise ValueError(f"fresh constant in answer tuple {t!r}")

    def sorted_tuples(self) -> tuple[tuple[Constant, ...], ...]:
        return tuple(sorted(self.tuples, key=lambda t: tuple(c.sort_key() for c in t)))

    def __contains__(self, item: tuple[Constant, ...]) -> bool:
        return tuple(item) in self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[tuple[Constant, ...]]:
        return iter(self.sorted_tuples())


def _unify(
    terms: tuple[Term, ...],
    args: tuple[Constant, ...],
    env: dict[Var, Constant],
) -> dict[Var, Constant] | None:
    out = env
    for term, value in zip(terms, args):
        if isinstance(term, Var):
            bound = out.get(term)
            if bound is None:
                if out is env:
                    out = dict(env)
                out[term] = value
            elif bound != value:
                return None
        elif term != value:
            return None
    return out


def find_homomorphisms(
    query: ConjunctiveQuery, facts: Iterable[Fact]
) -> list[dict[Var, Constant]]:
    """All assignments mapping every body atom onto a fact.

    Backtracking over atoms ordered by ascending candidate count (ties by
    body position); the result list is deduplicated and canonically sorted.
    """
    by_pred: dict[Predicate, list[tuple[Constant, ...]]] = {}
    for f in sorted(facts, key=fact_sort_key):
        rows = by_pred.setdefault(f.pred, [])
        if not rows or rows[-1] != f.args:
            rows.append(f.args)
    order = sorted(
        range(len(query.body)),
        key=lambda i: (len(by_pred.get(query.body[i].pred, ())), i),
    )
    results: dict[tuple, dict[Var, Constant]] = {}
    variables = query.variables()

    def extend(i: int, env: dict[Var, Constant]) -> None:
        if i == len(order):
            signature = tuple(env[v] for v in variables)
            results.setdefault(signature, env)
            return
        atom = query.body[order[i]]
        for args in by_pred.get(atom.pred, ()):
            new_env = _unify(atom.terms, args, env)
            if new_env is not None:
                extend(i + 1, new_env)

    extend(0, {})
    return [
        results[sig]
        for sig in sorted(results, key=lambda s: tuple(c.sort_key() for c in s))
    ]


def _project_answers(
    homs: list[dict[Var, Constant]], head: tuple[Var, ...]
) -> frozenset[tuple[Constant, ...]]:
    out = set()
    for h in homs:
        t = tuple(h[v] for v in head)
        if not any(c.is_fresh for c in t):
            out.add(t)
    return frozenset(out)


def evaluate_over_prefix(
    chase: ChaseState, query: ConjunctiveQuery, level_bound: int
) -> AnswerSet:
    """Answers over the facts of ``chase`` at levels strictly below ``level_bound``."""
    if chase.status is ChaseStatus.FAILED:
        raise FailedChaseError(
            "the chase failed; the database is inconsistent and every tuple is certain"
        )
    if level_bound < 0:
        raise ValueError("level bound must be non-negative")
    built = chase.queryable_level_bound()
    if built is not None and level_bound > built:
        raise PrefixNotMaterializedError(
            f"levels below {level_bound} requested, but only levels below "
            f"{built} are fully materialized"
        )
    homs = find_homomorphisms(query, chase.facts_below(level_bound))
    return AnswerSet(_project_answers(homs, query.head), level_bound)


def brute_force_evaluate(
    instance: Iterable[Fact], query: ConjunctiveQuery
) -> AnswerSet:
    """Reference evaluator: try every assignment over the active domain.

    Kept deliberately naive and independent of the homomorphism search so
    the two can check each other.
    """
    facts = set()
    constants = set()
    for f in instance:
        facts.add((f.pred, f.args))
        constants.update(f.args)
    domain = sorted(constants)
    variables = query.variables()
    answers = set()
    for values in itertools.product(domain, repeat=len(variables)):
        env = dict(zip(variables, values))
        ok = True
        for atom in query.body:
            args = tuple(env[t] if isinstance(t, Var) else t for t in atom.terms)
            if (atom.pred, args) not in facts:
                ok = False
                break
        if ok:
            t = tuple(env[v] for v in query.head)
            if not any(c.is_fresh for c in t):
                answers.add(t)
    return AnswerSet(frozenset(answers), None)


def freeze_query(
    query: ConjunctiveQuery,
) -> tuple[frozenset[Fact], tuple[Constant, ...]]:
    """Turn the body into level-0 facts by sending each distinct variable to a
    reserved database constant ``_frz<k>`` (numbered by first occurrence);
    returns the facts and the frozen head tuple."""
    mapping = {
        v: dom(f"{FROZEN_PREFIX}{k}")
        for k, v in enumerate(query.variables(), start=1)
    }
    facts = frozenset(
        Fact(
            atom.pred,
            tuple(mapping[t] if isinstance(t, Var) else t for t in atom.terms),
            0,
        )
        for atom in query.body
    )
    return facts, tuple(mapping[v] for v in query.head)


class ContainmentVerdict(enum.Enum):
    CONTAINED = "contained"
    NOT_CONTAINED_UP_TO_L = "not-contained-up-to-level"


@dataclass(frozen=True)
class ContainmentResult:
    verdict: ContainmentVerdict
    level_bound: int
    vacuous: bool = False

    @property
    def contained(self) -> bool:
        return self.verdict is ContainmentVerdict.CONTAINED


def check_containment(
    q1: ConjunctiveQuery,
    q2: ConjunctiveQuery,
    deps: DependencySet,
    level_bound: int,
    max_steps: int | None = None,
) -> ContainmentResult:
    """Is ``q1`` contained in ``q2`` under ``deps``, up to the level bound?

    The frozen body of ``q1`` is chased; containment holds when some
    homomorphism sends ``q2``'s body into the prefix below ``level_bound``
    and ``q2``'s head onto the frozen head of ``q1``.  A negative verdict is
    only "not contained up to this level": no data-independent level is
    sufficient in general.  If the frozen chase fails, ``q1`` is
    unsatisfiable under ``deps`` and containment holds vacuously.
    """
    if len(q1.head) != len(q2.head):
        raise ValueError("query heads are not union-compatible")
    frozen_facts, frozen_head = freeze_query(q1)
    budget = ChaseBudget(max_steps=max_steps, max_level=max(level_bound - 1, 0))
    state = run_chase(Database.of(frozen_facts), deps, budget)
    if state.status is ChaseStatus.FAILED:
        return ContainmentResult(ContainmentVerdict.CONTAINED, level_bound, vacuous=True)
    built = state.queryable_level_bound()
    if built is not None and level_bound > built:
        raise PrefixNotMaterializedError(
            f"chase budget too small to materialize levels below {level_bound}"
        )
    homs = find_homomorphisms(q2, state.facts_below(level_bound))
    contained = any(tuple(h[v] for v in q2.head) == frozen_head for h in homs)
    verdict = (
        ContainmentVerdict.CONTAINED
        if contained
        else ContainmentVerdict.NOT_CONTAINED_UP_TO_L
    )
    return ContainmentResult(verdict, level_bound)
