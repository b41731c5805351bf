from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdchase import (
    ChaseBudget,
    ChaseState,
    ChaseStatus,
    Database,
    DependencySet,
    Fact,
    IdStep,
    InclusionDependency,
    KdStep,
    KeyDependency,
    Predicate,
    StepOutcome,
    apply_id_rule,
    apply_kd_rule,
    chase_step,
    dom,
    fresh,
    id_applicable,
    kd_applicable,
    kd_saturate,
    replay_trace,
    resume_chase,
    run_chase,
)

from fixtures import (
    DEPT,
    EMPLOYEE,
    MANAGER,
    MANAGES,
    WORKS_IN,
    org_deps,
    org_incomplete_db,
)

M, D = dom("m"), dom("d")
TO_EMPLOYEE = InclusionDependency(MANAGER, EMPLOYEE, (1,), (1,))
TO_MANAGES = InclusionDependency(MANAGER, MANAGES, (1,), (1,))
TO_DEPT = InclusionDependency(WORKS_IN, DEPT, (2,), (1,))
KEY_WORKS_IN = KeyDependency(WORKS_IN, frozenset({1}))


def state_of(*facts: Fact) -> ChaseState:
    return ChaseState.from_facts(facts, status=ChaseStatus.ACTIVE)


def test_id_applicable():
    state = state_of(Fact(MANAGER, (M,)))
    assert id_applicable(state, Fact(MANAGER, (M,)), TO_EMPLOYEE)
    state = state_of(Fact(MANAGER, (M,)), Fact(EMPLOYEE, (M,)))
    assert not id_applicable(state, Fact(MANAGER, (M,)), TO_EMPLOYEE)
    state = state_of(Fact(WORKS_IN, (M, D)), Fact(DEPT, (D,)))
    assert not id_applicable(state, Fact(WORKS_IN, (M, D)), TO_DEPT)


def test_id_applicable_requires_matching_predicate():
    state = state_of(Fact(MANAGER, (M,)))
    with pytest.raises(ValueError):
        id_applicable(state, Fact(MANAGER, (M,)), TO_DEPT)


def test_apply_id_rule_fills_fresh_left_to_right():
    state = state_of(Fact(MANAGER, (M,)))
    created = apply_id_rule(state, Fact(MANAGER, (M,), 0), TO_MANAGES)
    assert created == Fact(MANAGES, (M, fresh(1)), 1)
    assert state.next_fresh_index == 2
    assert state.step_count == 1


def test_apply_id_rule_full_width_adds_no_fresh():
    r = Predicate("r", 2)
    s = Predicate("s", 2)
    full = InclusionDependency(r, s, (1, 2), (1, 2))
    state = state_of(Fact(r, (dom("1"), fresh(1)), 1))
    created = apply_id_rule(state, Fact(r, (dom("1"), fresh(1)), 1), full)
    assert created == Fact(s, (dom("1"), fresh(1)), 2)
    assert state.next_fresh_index == 2


def test_apply_id_rule_checks_contract():
    state = state_of(Fact(MANAGER, (M,)), Fact(EMPLOYEE, (M,)))
    with pytest.raises(ValueError):
        apply_id_rule(state, Fact(MANAGER, (M,), 0), TO_EMPLOYEE)


def test_kd_applicable():
    t1 = Fact(WORKS_IN, (M, D), 0)
    t2 = Fact(WORKS_IN, (M, fresh(1)), 2)
    t3 = Fact(WORKS_IN, (dom("x"), D), 0)
    state = state_of(t1, t2, t3)
    assert kd_applicable(state, t1, t2, KEY_WORKS_IN)
    assert not kd_applicable(state, t1, t3, KEY_WORKS_IN)
    assert not kd_applicable(state, t1, t1, KEY_WORKS_IN)


def test_apply_kd_rule_domain_wins_and_min_level_survives():
    t1 = Fact(WORKS_IN, (M, fresh(2)), 2)
    t2 = Fact(WORKS_IN, (M, D), 0)
    state = state_of(t1, t2, Fact(MANAGES, (M, fresh(2)), 1))
    apply_kd_rule(state, t1, t2, KEY_WORKS_IN)
    assert state.fact_level(WORKS_IN, (M, D)) == 0
    assert state.fact_level(WORKS_IN, (M, fresh(2))) is None
    assert state.fact_level(MANAGES, (M, D)) == 1
    assert state.status is ChaseStatus.ACTIVE


def test_apply_kd_rule_two_domain_constants_fail():
    t1 = Fact(WORKS_IN, (M, dom("d1")), 0)
    t2 = Fact(WORKS_IN, (M, dom("d2")), 0)
    state = state_of(t1, t2)
    apply_kd_rule(state, t1, t2, KEY_WORKS_IN)
    assert state.status is ChaseStatus.FAILED
    assert state.fact_level(WORKS_IN, (M, dom("d1"))) == 0  # facts kept for diagnostics


def test_apply_kd_rule_smaller_fresh_wins():
    t1 = Fact(WORKS_IN, (M, fresh(5)), 1)
    t2 = Fact(WORKS_IN, (M, fresh(3)), 2)
    state = state_of(t1, t2)
    apply_kd_rule(state, t1, t2, KEY_WORKS_IN)
    assert state.fact_level(WORKS_IN, (M, fresh(3))) == 1


def test_kd_saturate_noop_without_violations():
    state = state_of(Fact(WORKS_IN, (M, D)), Fact(WORKS_IN, (dom("x"), D)))
    before = state.fact_set()
    kd_saturate(state, [KEY_WORKS_IN])
    assert state.fact_set() == before


def test_kd_saturate_failure_state():
    s = Predicate("s", 2)
    state = state_of(Fact(s, (dom("1"), dom("2"))), Fact(s, (dom("1"), dom("3"))))
    kd_saturate(state, [KeyDependency(s, frozenset({1}))])
    assert state.status is ChaseStatus.FAILED


def test_golden_chase_completes_with_exact_facts_and_levels():
    state = run_chase(org_incomplete_db(), org_deps())
    assert state.status is ChaseStatus.COMPLETED
    assert state.fact_set() == {
        Fact(MANAGER, (M,), 0),
        Fact(WORKS_IN, (M, D), 0),
        Fact(EMPLOYEE, (M,), 1),
        Fact(MANAGES, (M, D), 1),
        Fact(DEPT, (D,), 1),
    }


def test_golden_chase_step_sequence():
    state = run_chase(org_incomplete_db(), org_deps(), keep_trace=True)
    kinds = [
        (step.dependency, step.created.render())
        if isinstance(step, IdStep)
        else (step.dependency, None)
        for step in state.trace.steps
    ]
    assert kinds == [
        ("ID:manager[1]<=employee[1]", "employee(m)"),
        ("ID:manager[1]<=manages[1]", "manages(m,_f1)"),
        ("ID:manages[1,2]<=works_in[1,2]", "works_in(m,_f1)"),
        ("KD:works_in{1}", None),
        ("ID:works_in[2]<=dept[1]", "dept(d)"),
    ]


def test_satisfied_state_completes_without_changes():
    state = run_chase(org_incomplete_db(), org_deps())
    facts = state.fact_set()
    again = resume_chase(
        ChaseState.from_facts(facts, status=ChaseStatus.ACTIVE), org_deps()
    )
    assert again.status is ChaseStatus.COMPLETED
    assert again.fact_set() == facts
    assert again.step_count == 0


def test_empty_database_completes_empty():
    state = run_chase(Database.of([]), org_deps())
    assert state.status is ChaseStatus.COMPLETED
    assert state.fact_set() == frozenset()


def test_initial_facts_preserved_verbatim():
    state = run_chase(org_incomplete_db(), org_deps())
    for f in org_incomplete_db():
        assert state.fact_level(f.pred, f.args) == 0


def test_completed_chase_satisfies_all_dependencies():
    state = run_chase(org_incomplete_db(), org_deps())
    facts = state.fact_set()
    by_pred = {}
    for f in facts:
        by_pred.setdefault(f.pred, []).append(f.args)
    for dep in org_deps().ids:
        for args in by_pred.get(dep.lhs_pred, []):
            proj = tuple(args[i - 1] for i in dep.lhs_attrs)
            assert any(
                tuple(w[i - 1] for i in dep.rhs_attrs) == proj
                for w in by_pred.get(dep.rhs_pred, [])
            ), f"{dep} unsatisfied for {args}"
    for kd in org_deps().kds:
        rows = by_pred.get(kd.pred, [])
        keys = [tuple(r[i - 1] for i in sorted(kd.key_attrs)) for r in rows]
        assert len(keys) == len(set(keys))


def test_trace_levels_and_fresh_monotonicity():
    state = run_chase(org_incomplete_db(), org_deps(), keep_trace=True)
    fresh_seen = []
    for step in state.trace.steps:
        if isinstance(step, IdStep):
            assert step.created.level == step.parent.level + 1
            fresh_seen.extend(step.fresh_indices)
        else:
            assert step.survivor is not None
            assert step.survivor.level == min(step.first.level, step.second.level)
    assert fresh_seen == sorted(fresh_seen)
    assert len(fresh_seen) == len(set(fresh_seen))


def test_determinism_two_runs_identical():
    a = run_chase(org_incomplete_db(), org_deps(), keep_trace=True)
    b = run_chase(org_incomplete_db(), org_deps(), keep_trace=True)
    assert a.content_snapshot() == b.content_snapshot()
    assert a.trace.steps == b.trace.steps


def test_trace_replay_reproduces_state():
    state = run_chase(org_incomplete_db(), org_deps(), keep_trace=True)
    replayed = replay_trace(org_incomplete_db(), state.trace)
    assert replayed.content_snapshot() == state.content_snapshot()


def test_trace_replay_reproduces_failure():
    s = Predicate("s", 2)
    db = Database.of(
        [Fact(s, (dom("1"), dom("2"))), Fact(s, (dom("1"), dom("3")))]
    )
    deps = DependencySet(ids=(), kds=(KeyDependency(s, frozenset({1})),))
    state = run_chase(db, deps, keep_trace=True)
    assert state.status is ChaseStatus.FAILED
    replayed = replay_trace(db, state.trace)
    assert replayed.content_snapshot() == state.content_snapshot()


def test_step_budget_leaves_active_with_bound():
    state = run_chase(org_incomplete_db(), org_deps(), ChaseBudget(max_steps=1))
    assert state.status is ChaseStatus.ACTIVE
    assert state.step_count == 1
    assert state.queryable_level_bound() is not None
    final = resume_chase(state, org_deps())
    assert final.status is ChaseStatus.COMPLETED
    assert final.fact_set() == run_chase(org_incomplete_db(), org_deps()).fact_set()


def test_level_budget_materializes_prefix():
    e = Predicate("e", 1)
    r = Predicate("r", 2)
    deps = DependencySet(
        ids=(
            InclusionDependency(e, r, (1,), (1,)),
            InclusionDependency(r, e, (2,), (1,)),
        ),
        kds=(),
    )
    db = Database.of([Fact(e, (dom("a"),))])
    state = run_chase(db, deps, ChaseBudget(max_level=4))
    assert state.status is ChaseStatus.ACTIVE
    assert max(f.level for f in state.fact_set()) == 4
    assert state.queryable_level_bound() == 5


def test_chase_step_outcomes():
    state = ChaseState.from_database(org_incomplete_db())
    outcome = chase_step(state, org_deps())
    assert outcome is StepOutcome.APPLIED
    done = run_chase(org_incomplete_db(), org_deps())
    assert chase_step(done, org_deps()) is StepOutcome.COMPLETED


def test_copy_is_independent():
    state = run_chase(org_incomplete_db(), org_deps(), ChaseBudget(max_steps=2))
    snapshot = state.copy()
    resume_chase(state, org_deps())
    assert snapshot.step_count == 2
    assert state.status is ChaseStatus.COMPLETED
    assert snapshot.status is ChaseStatus.ACTIVE


@st.composite
def acyclic_problem(draw):
    arities = draw(st.lists(st.integers(1, 2), min_size=2, max_size=4))
    preds = [Predicate(f"p{i}", a) for i, a in enumerate(arities)]
    ids = []
    for lo in range(len(preds)):
        for hi in range(lo + 1, len(preds)):
            if not draw(st.booleans()):
                continue
            width = draw(st.integers(1, min(preds[lo].arity, preds[hi].arity)))
            lhs = draw(st.permutations(range(1, preds[lo].arity + 1)))[:width]
            rhs = draw(st.permutations(range(1, preds[hi].arity + 1)))[:width]
            ids.append(InclusionDependency(preds[lo], preds[hi], tuple(lhs), tuple(rhs)))
    kds = tuple(
        KeyDependency(p, frozenset({draw(st.integers(1, p.arity))}))
        for p in preds
        if p.arity >= 2 and draw(st.booleans())
    )
    names = ["a", "b", "c"]
    facts = []
    for _ in range(draw(st.integers(0, 5))):
        pred = draw(st.sampled_from(preds))
        args = tuple(dom(draw(st.sampled_from(names))) for _ in range(pred.arity))
        facts.append(Fact(pred, args))
    return DependencySet(tuple(ids), kds), Database.of(facts)


@settings(max_examples=120, deadline=None)
@given(acyclic_problem())
def test_acyclic_sets_terminate_without_budget_pressure(problem):
    deps, db = problem
    state = run_chase(db, deps, ChaseBudget(max_steps=10_000))
    assert state.status in (ChaseStatus.COMPLETED, ChaseStatus.FAILED)
