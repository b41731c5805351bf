"""Shared fixtures: the organizational EER sample used across the suite."""

from __future__ import annotations

from cdchase import (
    Database,
    DependencySet,
    Fact,
    InclusionDependency,
    KeyDependency,
    Predicate,
    Schema,
    dom,
)

DEPT = Predicate("dept", 1)
EMPLOYEE = Predicate("employee", 1)
MANAGER = Predicate("manager", 1)
WORKS_IN = Predicate("works_in", 2)
MANAGES = Predicate("manages", 2)
DEPT_NAME = Predicate("dept_name", 2)
EMP_NAME = Predicate("emp_name", 2)
SINCE = Predicate("since", 3)


def org_schema() -> Schema:
    return Schema(
        [DEPT, EMPLOYEE, MANAGER, WORKS_IN, MANAGES, DEPT_NAME, EMP_NAME, SINCE]
    )


def org_ids() -> tuple[InclusionDependency, ...]:
    return (
        InclusionDependency(DEPT_NAME, DEPT, (1,), (1,)),
        InclusionDependency(EMP_NAME, EMPLOYEE, (1,), (1,)),
        InclusionDependency(SINCE, WORKS_IN, (1, 2), (1, 2)),
        InclusionDependency(WORKS_IN, EMPLOYEE, (1,), (1,)),
        InclusionDependency(WORKS_IN, DEPT, (2,), (1,)),
        InclusionDependency(MANAGES, MANAGER, (1,), (1,)),
        InclusionDependency(MANAGES, DEPT, (2,), (1,)),
        InclusionDependency(MANAGER, EMPLOYEE, (1,), (1,)),
        InclusionDependency(MANAGES, WORKS_IN, (1, 2), (1, 2)),
        InclusionDependency(EMPLOYEE, WORKS_IN, (1,), (1,)),
        InclusionDependency(MANAGER, MANAGES, (1,), (1,)),
    )


def org_deps() -> DependencySet:
    return DependencySet(
        ids=org_ids(),
        kds=(
            KeyDependency(WORKS_IN, frozenset({1})),
            KeyDependency(MANAGES, frozenset({1})),
        ),
    )


WORKS_IN_TO_DEPT = InclusionDependency(WORKS_IN, DEPT, (2,), (1,))


def org_deps_without_dept_target() -> DependencySet:
    """The same set minus the inclusion tying works_in's second position to dept."""
    full = org_deps()
    return DependencySet(
        ids=tuple(d for d in full.ids if d != WORKS_IN_TO_DEPT),
        kds=full.kds,
    )


def org_incomplete_db() -> Database:
    return Database.of(
        [Fact(MANAGER, (dom("m"),)), Fact(WORKS_IN, (dom("m"), dom("d")))]
    )


ORG_SCHEMA_TEXT = """\
# organizational sample schema
predicate dept/1
predicate employee/1
predicate manager/1
predicate works_in/2
predicate manages/2
predicate dept_name/2
predicate emp_name/2
predicate since/3
"""

ORG_DEPS_TEXT = """\
inclusion dept_name[1] <= dept[1]
inclusion emp_name[1] <= employee[1]
inclusion since[1,2] <= works_in[1,2]
inclusion works_in[1] <= employee[1]
inclusion works_in[2] <= dept[1]
inclusion manages[1] <= manager[1]
inclusion manages[2] <= dept[1]
inclusion manager[1] <= employee[1]
inclusion manages[1,2] <= works_in[1,2]
inclusion employee[1] <= works_in[1]
inclusion manager[1] <= manages[1]
key works_in {1}
key manages {1}
"""

ORG_DATA_TEXT = """\
manager(m)
works_in(m,d)
"""
