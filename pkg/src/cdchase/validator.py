"""Decide whether a dependency set encodes an extended entity-relationship
schema, by searching for a partition of the predicates into entities,
relationships, and attributes under which every dependency has one of the
admissible shapes and every mandatory companion dependency is present.

The admissible shapes, over a candidate partition:

  keys        (1) a single-position key on a relationship;
              (2) a key covering all but the last position of an attribute.
  inclusions  (1) entity[1] <= entity[1]
              (2) entity[1] <= relationship[i]
              (3) relationship[i] <= entity[1]
              (4) relationship[1..k] <= relationship[perm of 1..k], equal arity
              (5) attribute[1] <= entity[1]
              (6) attribute[1..n] <= relationship[1..n], n = arity(attr) - 1
              (7) entity[1] <= attribute[1]
              (8) relationship[1..n] <= attribute[1..n], n = arity(attr) - 1

plus the companion requirements: every relationship position points to
exactly one entity (e); every attribute hangs off exactly one entity or
relationship (f); and the reverse inclusion exists for entity-in-relationship
participation (g), relationship-to-attribute inclusions (h), and
entity-to-attribute inclusions (i).  Conditions (a) and (b) fix arities:
entities are unary, everything else has arity at least two.

Unary predicates can only be entities and predicates of arity two or more
cannot be, so the search runs over relationship-or-attribute assignments of
the wider predicates only.  Schemata are small; the exponential worst case
is accepted and documented.
"""

from __future__ import annotations

import enum
import graphlib
import itertools
from dataclasses import dataclass
from typing import Iterable, Union

from .model import (
    DependencySet,
    InclusionDependency,
    KeyDependency,
    Predicate,
    Schema,
    dependency_sort_key,
)

__all__ = [
    "CdCondition",
    "CdViolation",
    "CdPartition",
    "partition_violations",
    "validate_cd_set",
    "is_full_width",
    "is_cyclic",
]


class CdCondition(enum.Enum):
    A = "a"
    B = "b"
    C = "c"
    D = "d"
    E = "e"
    F = "f"
    G = "g"
    H = "h"
    I = "i"
    J = "j"  # reserved; no check maps to it


@dataclass(frozen=True)
class CdViolation:
    condition: CdCondition
    detail: str

    def __repr__(self) -> str:
        return f"({self.condition.value}) {self.detail}"


@dataclass(frozen=True)
class CdPartition:
    """Assignment of every predicate to entities, relationships, or attributes."""

    entities: frozenset[Predicate]
    relationships: frozenset[Predicate]
    attributes: frozenset[Predicate]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", frozenset(self.entities))
        object.__setattr__(self, "relationships", frozenset(self.relationships))
        object.__setattr__(self, "attributes", frozenset(self.attributes))
        if (
            self.entities & self.relationships
            or self.entities & self.attributes
            or self.relationships & self.attributes
        ):
            raise ValueError("partition classes must be disjoint")

    def covers(self, schema: Schema) -> bool:
        return self.entities | self.relationships | self.attributes == set(
            schema.predicates
        )

    def class_of(self, pred: Predicate) -> str:
        if pred in self.entities:
            return "entity"
        if pred in self.relationships:
            return "relationship"
        if pred in self.attributes:
            return "attribute"
        raise KeyError(pred)


def is_full_width(dep: InclusionDependency) -> bool:
    """True iff both attribute lists cover every position of their predicate."""
    return dep.full_width


def is_cyclic(ids: Iterable[InclusionDependency]) -> bool:
    """True iff the graph with an edge lhs -> rhs per inclusion has a cycle."""
    graph: dict[str, set[str]] = {}
    for dep in ids:
        graph.setdefault(dep.rhs_pred.name, set()).add(dep.lhs_pred.name)
        graph.setdefault(dep.lhs_pred.name, set())
    try:
        graphlib.TopologicalSorter(graph).prepare()
    except graphlib.CycleError:
        return True
    return False


def _prefix(n: int) -> tuple[int, ...]:
    return tuple(range(1, n + 1))


def partition_violations(
    schema: Schema, deps: DependencySet, partition: CdPartition
) -> list[CdViolation]:
    """All conditions violated by ``deps`` under a fixed candidate partition."""
    if not partition.covers(schema):
        raise ValueError("partition does not cover the schema exactly")
    ents, rels, attrs = partition.entities, partition.relationships, partition.attributes
    out: list[CdViolation] = []

    for p in sorted(ents, key=lambda p: p.name):
        if p.arity != 1:
            out.append(CdViolation(CdCondition.A, f"entity {p!r} is not unary"))
    for p in sorted(rels | attrs, key=lambda p: p.name):
        if p.arity < 2:
            out.append(
                CdViolation(CdCondition.B, f"{partition.class_of(p)} {p!r} has arity < 2")
            )

    for kd in deps.sorted_kds():
        form1 = kd.pred in rels and len(kd.key_attrs) == 1
        form2 = kd.pred in attrs and kd.sorted_attrs == _prefix(kd.pred.arity - 1)
        if not (form1 or form2):
            out.append(CdViolation(CdCondition.C, f"key {kd.encode()} has no admissible form"))

    for dep in deps.sorted_ids():
        if not _id_has_admissible_form(dep, ents, rels, attrs):
            out.append(
                CdViolation(CdCondition.D, f"inclusion {dep.encode()} has no admissible form")
            )

    id_set = set(deps.ids)

    for r in sorted(rels, key=lambda p: p.name):
        for i in range(1, r.arity + 1):
            targets = sorted(
                {
                    dep.rhs_pred
                    for dep in deps.ids
                    if dep.lhs_pred == r
                    and dep.lhs_attrs == (i,)
                    and dep.rhs_attrs == (1,)
                    and dep.rhs_pred in ents
                },
                key=lambda p: p.name,
            )
            if len(targets) == 0:
                out.append(
                    CdViolation(
                        CdCondition.E,
                        f"relationship {r!r} position {i} has no entity target",
                    )
                )
            elif len(targets) > 1:
                out.append(
                    CdViolation(
                        CdCondition.E,
                        f"relationship {r!r} position {i} has several entity targets: "
                        + ", ".join(repr(t) for t in targets),
                    )
                )

    for a in sorted(attrs, key=lambda p: p.name):
        n = a.arity - 1
        owners = sorted(
            {
                dep.rhs_pred
                for dep in deps.ids
                if dep.lhs_pred == a
                and dep.lhs_attrs == _prefix(n)
                and dep.rhs_attrs == _prefix(n)
                and dep.rhs_pred in (rels | ents)
                and dep.rhs_pred.arity == n
            },
            key=lambda p: p.name,
        )
        if len(owners) == 0:
            out.append(CdViolation(CdCondition.F, f"attribute {a!r} has no owner"))
        elif len(owners) > 1:
            out.append(
                CdViolation(
                    CdCondition.F,
                    f"attribute {a!r} has several owners: "
                    + ", ".join(repr(t) for t in owners),
                )
            )

    for dep in deps.sorted_ids():
        lhs, rhs = dep.lhs_pred, dep.rhs_pred
        if lhs in ents and rhs in rels and dep.lhs_attrs == (1,) and len(dep.rhs_attrs) == 1:
            back = InclusionDependency(rhs, lhs, dep.rhs_attrs, (1,))
            if back not in id_set:
                out.append(
                    CdViolation(
                        CdCondition.G,
                        f"{dep.encode()} lacks the reverse inclusion {back.encode()}",
                    )
                )
        if (
            lhs in rels
            and rhs in attrs
            and dep.lhs_attrs == _prefix(lhs.arity)
            and dep.rhs_attrs == _prefix(lhs.arity)
            and rhs.arity == lhs.arity + 1
        ):
            back = InclusionDependency(rhs, lhs, dep.rhs_attrs, dep.lhs_attrs)
            if back not in id_set:
                out.append(
                    CdViolation(
                        CdCondition.H,
                        f"{dep.encode()} lacks the reverse inclusion {back.encode()}",
                    )
                )
        if (
            lhs in ents
            and rhs in attrs
            and rhs.arity == 2
            and dep.lhs_attrs == (1,)
            and dep.rhs_attrs == (1,)
        ):
            back = InclusionDependency(rhs, lhs, (1,), (1,))
            if back not in id_set:
                out.append(
                    CdViolation(
                        CdCondition.I,
                        f"{dep.encode()} lacks the reverse inclusion {back.encode()}",
                    )
                )
    return out


def _id_has_admissible_form(
    dep: InclusionDependency,
    ents: frozenset[Predicate],
    rels: frozenset[Predicate],
    attrs: frozenset[Predicate],
) -> bool:
    lhs, rhs = dep.lhs_pred, dep.rhs_pred
    la, ra = dep.lhs_attrs, dep.rhs_attrs
    if lhs in ents and rhs in ents:
        return la == (1,) and ra == (1,)
    if lhs in ents and rhs in rels:
        return la == (1,) and len(ra) == 1
    if lhs in rels and rhs in ents:
        return len(la) == 1 and ra == (1,)
    if lhs in rels and rhs in rels:
        k = lhs.arity
        return (
            rhs.arity == k
            and la == _prefix(k)
            and sorted(ra) == list(_prefix(k))
        )
    if lhs in attrs and rhs in ents:
        return la == (1,) and ra == (1,)
    if lhs in attrs and rhs in rels:
        n = rhs.arity
        return lhs.arity == n + 1 and la == _prefix(n) and ra == _prefix(n)
    if lhs in ents and rhs in attrs:
        return la == (1,) and ra == (1,)
    if lhs in rels and rhs in attrs:
        n = lhs.arity
        return rhs.arity == n + 1 and la == _prefix(n) and ra == _prefix(n)
    return False


def validate_cd_set(
    schema: Schema, deps: DependencySet
) -> Union[CdPartition, list[CdViolation]]:
    """Search for a witnessing partition; report best-candidate violations if none.

    Unary predicates are forced into the entity class.  Predicates of arity
    two or more are assigned relationship-first, depth-first, in name order,
    and the first candidate with no violation is returned.  When every
    candidate fails, the one with the fewest violations (ties broken by
    enumeration order) is reported.
    """
    unary = [p for p in schema.predicates if p.arity == 1]
    wide = [p for p in schema.predicates if p.arity >= 2]
    best: tuple[int, list[CdViolation]] | None = None
    for assignment in itertools.product(("relationship", "attribute"), repeat=len(wide)):
        rels = frozenset(p for p, cls in zip(wide, assignment) if cls == "relationship")
        attrs = frozenset(p for p, cls in zip(wide, assignment) if cls == "attribute")
        candidate = CdPartition(frozenset(unary), rels, attrs)
        violations = partition_violations(schema, deps, candidate)
        if not violations:
            return candidate
        if best is None or len(violations) < best[0]:
            best = (len(violations), violations)
    assert best is not None
    return best[1]
