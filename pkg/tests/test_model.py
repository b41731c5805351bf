from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdchase import (
    Constant,
    Database,
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

constants = st.one_of(
    st.text(min_size=0, max_size=6).map(dom),
    st.integers(min_value=1, max_value=50).map(fresh),
)


def test_domain_constants_order_bytewise():
    assert compare_constants(dom("a"), dom("b")) == -1
    assert compare_constants(dom("b"), dom("a")) == 1
    assert compare_constants(dom("a"), dom("a")) == 0


def test_domain_before_fresh():
    assert compare_constants(dom("z"), fresh(1)) == -1
    assert fresh(1) > dom("zzzz")


def test_fresh_order_is_numeric_not_textual():
    assert compare_constants(fresh(2), fresh(10)) == -1


@given(constants, constants)
def test_compare_antisymmetric(a, b):
    assert compare_constants(a, b) == -compare_constants(b, a)
    if compare_constants(a, b) == 0:
        assert a == b


@given(constants, constants, constants)
def test_compare_transitive(a, b, c):
    if compare_constants(a, b) <= 0 and compare_constants(b, c) <= 0:
        assert compare_constants(a, c) <= 0


def test_constant_validation():
    with pytest.raises(ValueError):
        fresh(0)
    with pytest.raises(ValueError):
        Constant(is_fresh=True, name="x", index=1)
    with pytest.raises(ValueError):
        Constant(is_fresh=False, name="x", index=3)


E1 = Predicate("e", 1)
R2 = Predicate("r", 2)
S2 = Predicate("s", 2)


def test_fact_sort_key_orders_by_args():
    f1 = Fact(E1, (dom("1"),))
    f2 = Fact(E1, (dom("2"),))
    assert fact_sort_key(f1) < fact_sort_key(f2)


def test_fact_sort_key_predicate_name_dominates():
    r = Fact(R2, (dom("1"), fresh(1)))
    s = Fact(S2, (dom("0"), dom("0")))
    assert fact_sort_key(r) < fact_sort_key(s)


def test_fact_sort_key_ignores_level():
    a = Fact(E1, (dom("m"),), 0)
    b = Fact(E1, (dom("m"),), 3)
    assert fact_sort_key(a) == fact_sort_key(b)


@given(
    st.lists(
        st.tuples(st.sampled_from("ers"), st.tuples(constants, constants)),
        min_size=2,
        max_size=8,
    )
)
def test_fact_order_strict_on_distinct_keys(rows):
    preds = {"e": Predicate("e", 2), "r": Predicate("r", 2), "s": Predicate("s", 2)}
    facts = [Fact(preds[name], args) for name, args in rows]
    for a in facts:
        for b in facts:
            if (a.pred, a.args) != (b.pred, b.args):
                assert fact_sort_key(a) != fact_sort_key(b)
            else:
                assert fact_sort_key(a) == fact_sort_key(b)


def test_fact_arity_checked():
    with pytest.raises(ValueError):
        Fact(R2, (dom("a"),))


def test_dependency_encoding_and_order():
    emp = Predicate("employee", 1)
    dept = Predicate("dept", 1)
    works_in = Predicate("works_in", 2)
    to_emp = InclusionDependency(works_in, emp, (1,), (1,))
    to_dept = InclusionDependency(works_in, dept, (2,), (1,))
    assert dependency_sort_key(to_emp) == "ID:works_in[1]<=employee[1]"
    assert dependency_sort_key(to_dept) == "ID:works_in[2]<=dept[1]"
    assert dependency_sort_key(to_emp) < dependency_sort_key(to_dept)


def test_dependency_order_identical_and_kinds():
    r = Predicate("r", 2)
    a = InclusionDependency(r, r, (1, 2), (2, 1))
    b = InclusionDependency(r, r, (1, 2), (2, 1))
    kd = KeyDependency(r, frozenset({1}))
    assert dependency_sort_key(a) == dependency_sort_key(b)
    assert dependency_sort_key(a) != dependency_sort_key(kd)
    assert dependency_sort_key(kd) == "KD:r{1}"


def test_inclusion_validation():
    r = Predicate("r", 2)
    e = Predicate("e", 1)
    with pytest.raises(ValueError):
        InclusionDependency(r, e, (1, 1), (1,))
    with pytest.raises(ValueError):
        InclusionDependency(r, e, (1, 2), (1, 1))
    with pytest.raises(ValueError):
        InclusionDependency(r, e, (3,), (1,))
    with pytest.raises(ValueError):
        InclusionDependency(r, e, (), ())


def test_full_width():
    works_in = Predicate("works_in", 2)
    manages = Predicate("manages", 2)
    emp = Predicate("employee", 1)
    assert InclusionDependency(manages, works_in, (1, 2), (1, 2)).full_width
    assert not InclusionDependency(works_in, emp, (1,), (1,)).full_width
    assert InclusionDependency(R2, S2, (2, 1), (1, 2)).full_width


def test_key_validation():
    with pytest.raises(ValueError):
        KeyDependency(E1, frozenset({1}))
    with pytest.raises(ValueError):
        KeyDependency(R2, frozenset())
    with pytest.raises(ValueError):
        KeyDependency(R2, frozenset({3}))


def test_one_key_per_predicate():
    with pytest.raises(ValueError):
        DependencySet(
            ids=(),
            kds=(KeyDependency(R2, frozenset({1})), KeyDependency(R2, frozenset({2}))),
        )


def test_schema_rejects_duplicates():
    schema = Schema([E1])
    with pytest.raises(ValueError):
        schema.add(Predicate("e", 2))


def test_database_rejects_fresh_and_levels():
    with pytest.raises(ValueError):
        Database.of([Fact(E1, (fresh(1),))])
    with pytest.raises(ValueError):
        Database.of([Fact(E1, (dom("a"),), 1)])
