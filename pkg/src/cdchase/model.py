"""Relational building blocks: constants, predicates, facts, dependencies.

Every scheduling choice in the chase is phrased as "take the first", so the
total orders defined here are part of the engine's contract, not cosmetics.
Database constants come before all fresh constants (labeled nulls); database
constants compare byte-wise on their name, fresh constants by creation
index.  Facts compare by predicate name and then argument-wise; dependencies
compare by a fixed string encoding.  Two runs over the same input therefore
replay the same steps on any platform.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

__all__ = [
    "Constant",
    "dom",
    "fresh",
    "compare_constants",
    "Predicate",
    "Schema",
    "Fact",
    "fact_sort_key",
    "InclusionDependency",
    "KeyDependency",
    "Dependency",
    "dependency_sort_key",
    "DependencySet",
    "Database",
]


@functools.total_ordering
@dataclass(frozen=True, slots=True)
class Constant:
    """A database constant or, when ``is_fresh``, the labeled null ``_f<index>``."""

    is_fresh: bool
    name: str = ""
    index: int = 0

    def __post_init__(self) -> None:
        if self.is_fresh:
            if self.index < 1:
                raise ValueError("fresh constant index must be positive")
            if self.name:
                raise ValueError("fresh constants are identified by index only")
        elif self.index != 0:
            raise ValueError("database constants are identified by name only")

    def sort_key(self) -> tuple[int, str, int]:
        return (1, "", self.index) if self.is_fresh else (0, self.name, 0)

    def render(self) -> str:
        return f"_f{self.index}" if self.is_fresh else self.name

    def __lt__(self, other: "Constant") -> bool:
        if not isinstance(other, Constant):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return self.render()


def dom(name: str) -> Constant:
    """Database constant with the given name."""
    return Constant(is_fresh=False, name=name)


def fresh(index: int) -> Constant:
    """Labeled null number ``index``, rendered as ``_f<index>``."""
    return Constant(is_fresh=True, index=index)


def compare_constants(a: Constant, b: Constant) -> int:
    """Strict total order: -1, 0 or 1.  Database constants precede fresh ones."""
    ka, kb = a.sort_key(), b.sort_key()
    if ka < kb:
        return -1
    return 0 if ka == kb else 1


@dataclass(frozen=True, slots=True)
class Predicate:
    name: str
    arity: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("predicate name must be non-empty")
        if self.arity < 1:
            raise ValueError(f"predicate {self.name} needs arity >= 1")

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"


class Schema:
    """Predicate namespace; names are unique within a schema."""

    def __init__(self, predicates: Iterable[Predicate] = ()) -> None:
        self._by_name: dict[str, Predicate] = {}
        for pred in predicates:
            self.add(pred)

    def add(self, pred: Predicate) -> Predicate:
        if pred.name in self._by_name:
            raise ValueError(f"duplicate predicate {pred.name}")
        self._by_name[pred.name] = pred
        return pred

    def __getitem__(self, name: str) -> Predicate:
        return self._by_name[name]

    def get(self, name: str) -> Predicate | None:
        return self._by_name.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def __iter__(self) -> Iterator[Predicate]:
        return iter(self.predicates)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Schema) and self._by_name == other._by_name

    def __repr__(self) -> str:
        return f"Schema({', '.join(repr(p) for p in self.predicates)})"

    @property
    def predicates(self) -> tuple[Predicate, ...]:
        return tuple(sorted(self._by_name.values(), key=lambda p: p.name))


@dataclass(frozen=True, slots=True)
class Fact:
    """A ground atom with a chase level.

    The level records how deep in the chase the fact was created; it is
    bookkeeping, not identity.  Deduplication by (predicate, args) with the
    min-level merge rule is handled by the stores that hold facts.
    """

    pred: Predicate
    args: tuple[Constant, ...]
    level: int = 0

    def __post_init__(self) -> None:
        if len(self.args) != self.pred.arity:
            raise ValueError(
                f"{self.pred!r} takes {self.pred.arity} arguments, got {len(self.args)}"
            )
        if self.level < 0:
            raise ValueError("fact level must be non-negative")

    @property
    def key(self) -> tuple[Predicate, tuple[Constant, ...]]:
        return (self.pred, self.args)

    def render(self) -> str:
        return f"{self.pred.name}({','.join(a.render() for a in self.args)})"

    def __repr__(self) -> str:
        return f"{self.render()}@{self.level}"


def fact_sort_key(f: Fact) -> tuple:
    """Orders facts by predicate name, then arguments element-wise.

    The level is excluded on purpose: two facts with the same predicate and
    arguments are the same fact for ordering and set semantics.
    """
    return (f.pred.name, tuple(a.sort_key() for a in f.args))


@dataclass(frozen=True, slots=True)
class InclusionDependency:
    """lhs[lhs_attrs] is contained in rhs[rhs_attrs]; positions are 1-based."""

    lhs_pred: Predicate
    rhs_pred: Predicate
    lhs_attrs: tuple[int, ...]
    rhs_attrs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lhs_attrs", tuple(self.lhs_attrs))
        object.__setattr__(self, "rhs_attrs", tuple(self.rhs_attrs))
        if not self.lhs_attrs:
            raise ValueError("attribute lists must be non-empty")
        if len(self.lhs_attrs) != len(self.rhs_attrs):
            raise ValueError("attribute lists must have equal length")
        for pred, attrs, side in (
            (self.lhs_pred, self.lhs_attrs, "lhs"),
            (self.rhs_pred, self.rhs_attrs, "rhs"),
        ):
            if len(set(attrs)) != len(attrs):
                raise ValueError(f"repeated position on {side} of {pred.name}")
            if any(a < 1 or a > pred.arity for a in attrs):
                raise ValueError(f"position out of range for {pred!r}")

    @property
    def full_width(self) -> bool:
        """True when both attribute lists cover every position of their predicate."""
        return (
            len(self.lhs_attrs) == self.lhs_pred.arity
            and len(self.rhs_attrs) == self.rhs_pred.arity
        )

    def encode(self) -> str:
        lhs = ",".join(map(str, self.lhs_attrs))
        rhs = ",".join(map(str, self.rhs_attrs))
        return f"ID:{self.lhs_pred.name}[{lhs}]<={self.rhs_pred.name}[{rhs}]"

    def __repr__(self) -> str:
        return self.encode()


@dataclass(frozen=True, slots=True)
class KeyDependency:
    """No two distinct facts over ``pred`` may agree on all of ``key_attrs``."""

    pred: Predicate
    key_attrs: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "key_attrs", frozenset(self.key_attrs))
        if self.pred.arity < 2:
            raise ValueError(f"keys need arity >= 2, {self.pred!r} has {self.pred.arity}")
        if not self.key_attrs:
            raise ValueError("key must name at least one position")
        if any(a < 1 or a > self.pred.arity for a in self.key_attrs):
            raise ValueError(f"key position out of range for {self.pred!r}")

    @property
    def sorted_attrs(self) -> tuple[int, ...]:
        return tuple(sorted(self.key_attrs))

    @property
    def nonkey_attrs(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.pred.arity + 1) if i not in self.key_attrs)

    def encode(self) -> str:
        return f"KD:{self.pred.name}{{{','.join(map(str, self.sorted_attrs))}}}"

    def __repr__(self) -> str:
        return self.encode()


Dependency = Union[InclusionDependency, KeyDependency]


def dependency_sort_key(dep: Dependency) -> str:
    """Deterministic total order over dependencies: byte order of the encoding."""
    return dep.encode()


@dataclass(frozen=True)
class DependencySet:
    """Inclusion and key dependencies over one schema; one key per predicate."""

    ids: tuple[InclusionDependency, ...]
    kds: tuple[KeyDependency, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "kds", tuple(self.kds))
        keyed: set[Predicate] = set()
        for kd in self.kds:
            if kd.pred in keyed:
                raise ValueError(f"second key for {kd.pred!r}")
            keyed.add(kd.pred)

    def sorted_ids(self) -> tuple[InclusionDependency, ...]:
        return tuple(sorted(self.ids, key=dependency_sort_key))

    def sorted_kds(self) -> tuple[KeyDependency, ...]:
        return tuple(sorted(self.kds, key=dependency_sort_key))

    def full_width_ids(self) -> tuple[InclusionDependency, ...]:
        return tuple(d for d in self.sorted_ids() if d.full_width)

    def kd_for(self, pred: Predicate) -> KeyDependency | None:
        for kd in self.kds:
            if kd.pred == pred:
                return kd
        return None

    def __len__(self) -> int:
        return len(self.ids) + len(self.kds)

    def __iter__(self) -> Iterator[Dependency]:
        return iter(self.sorted_ids() + self.sorted_kds())


@dataclass(frozen=True)
class Database:
    """Finite initial instance: level-0 facts over database constants only."""

    facts: frozenset[Fact]

    def __post_init__(self) -> None:
        object.__setattr__(self, "facts", frozenset(self.facts))
        for f in self.facts:
            if f.level != 0:
                raise ValueError(f"initial fact {f!r} must be at level 0")
            if any(a.is_fresh for a in f.args):
                raise ValueError(f"initial fact {f!r} contains a fresh constant")

    @classmethod
    def of(cls, facts: Iterable[Fact]) -> "Database":
        return cls(frozenset(facts))

    def active_domain(self) -> tuple[Constant, ...]:
        return tuple(sorted({a for f in self.facts for a in f.args}))

    def sorted_facts(self) -> tuple[Fact, ...]:
        return tuple(sorted(self.facts, key=fact_sort_key))

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.sorted_facts())
