"""Output formatting: human-readable text, canonical JSON, and DOT forests.

JSON output is canonical: fixed key order via sorted keys, facts ordered by
(level, fact key), ASCII-only.  Identical inputs produce byte-identical
output on any platform.  The DOT format draws the chase as a forest with
one band per level; the roots are the initial facts and each edge points
from the fact an inclusion step expanded to the fact it created.
"""

from __future__ import annotations

import json

from .chase import ChaseState, ChaseStatus, ChaseTrace, IdStep, KdStep
from .counterexample import GrowthReport, RefutationVerdict
from .dsl import render_constant, render_fact
from .model import Fact, fact_sort_key
from .query import AnswerSet, ConjunctiveQuery, ContainmentResult
from .validator import CdPartition, CdViolation

__all__ = [
    "FORMAT_VERSION",
    "to_canonical_json",
    "fact_payload",
    "chase_payload",
    "render_chase_text",
    "render_chase_dot",
    "partition_payload",
    "violations_payload",
    "render_partition_text",
    "render_violations_text",
    "answers_payload",
    "render_answers_text",
    "containment_payload",
    "render_containment_text",
    "growth_payload",
    "render_growth_text",
]

FORMAT_VERSION = 1


def to_canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def fact_payload(f: Fact) -> dict:
    return {
        "predicate": f.pred.name,
        "args": [a.render() for a in f.args],
        "level": f.level,
    }


def _trace_payload(trace: ChaseTrace) -> list[dict]:
    steps = []
    for step in trace.steps:
        if isinstance(step, IdStep):
            steps.append(
                {
                    "rule": "inclusion",
                    "dependency": step.dependency,
                    "input": fact_payload(step.parent),
                    "output": fact_payload(step.created),
                    "fresh": list(step.fresh_indices),
                }
            )
        else:
            entry = {
                "rule": "key",
                "dependency": step.dependency,
                "inputs": [fact_payload(step.first), fact_payload(step.second)],
                "substitution": [
                    {"replace": loser.render(), "with": winner.render()}
                    for loser, winner in step.substitution
                ],
            }
            if step.survivor is not None:
                entry["survivor"] = fact_payload(step.survivor)
            else:
                entry["failed_position"] = step.failed_position
                entry["conflict"] = [c.render() for c in step.conflict or ()]
            steps.append(entry)
    return steps


def chase_payload(state: ChaseState, include_trace: bool = False) -> dict:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "chase",
        "status": state.status.value,
        "step_count": state.step_count,
        "fact_count": state.fact_count(),
        "facts": [fact_payload(f) for f in state.sorted_facts(by="level")],
    }
    bound = state.queryable_level_bound()
    if state.status is ChaseStatus.ACTIVE and bound is not None:
        payload["materialized_below_level"] = bound
    if include_trace and state.trace is not None:
        payload["trace"] = _trace_payload(state.trace)
    return payload


def render_chase_text(state: ChaseState, include_trace: bool = False) -> str:
    lines = [f"status: {state.status.value}", f"inclusion steps: {state.step_count}"]
    bound = state.queryable_level_bound()
    if state.status is ChaseStatus.ACTIVE and bound is not None:
        lines.append(f"materialized below level: {bound}")
    lines.append(f"facts ({state.fact_count()}):")
    for f in state.sorted_facts(by="level"):
        lines.append(f"  [{f.level:>3}] {render_fact(f)}")
    if include_trace and state.trace is not None:
        lines.append("trace:")
        for i, step in enumerate(state.trace.steps, start=1):
            if isinstance(step, IdStep):
                lines.append(
                    f"  {i:>3}. {step.dependency} on {render_fact(step.parent)}"
                    f" -> {render_fact(step.created)} at level {step.created.level}"
                )
            else:
                subst = ", ".join(
                    f"{l.render()}:={w.render()}" for l, w in step.substitution
                )
                if step.survivor is None:
                    a, b = step.conflict or (None, None)
                    lines.append(
                        f"  {i:>3}. {step.dependency} on {render_fact(step.first)},"
                        f" {render_fact(step.second)} FAILED"
                        f" ({a.render()} vs {b.render()})"
                    )
                else:
                    lines.append(
                        f"  {i:>3}. {step.dependency} merges {render_fact(step.first)},"
                        f" {render_fact(step.second)}"
                        + (f" [{subst}]" if subst else "")
                    )
    return "\n".join(lines) + "\n"


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_chase_dot(state: ChaseState, title: str = "chase") -> str:
    """Derivation forest; one rank band per level, annotated on the left."""
    facts = state.sorted_facts(by="level")
    by_level: dict[int, list[Fact]] = {}
    for f in facts:
        by_level.setdefault(f.level, []).append(f)
    lines = [
        f"digraph {_dot_quote(title)} {{",
        "  rankdir=TB;",
        "  node [shape=box, fontname=\"monospace\"];",
    ]
    levels = sorted(by_level)
    for level in levels:
        lines.append("  {")
        lines.append("    rank=same;")
        lines.append(
            f"    {_dot_quote(f'level {level}')} [shape=plaintext, fontcolor=gray];"
        )
        for f in by_level[level]:
            lines.append(f"    {_dot_quote(render_fact(f))};")
        lines.append("  }")
    for a, b in zip(levels, levels[1:]):
        lines.append(
            f"  {_dot_quote(f'level {a}')} -> {_dot_quote(f'level {b}')} [style=invis];"
        )
    for f in facts:
        parent = state.parent_of(f)
        if parent is not None:
            lines.append(
                f"  {_dot_quote(render_fact(parent))} -> {_dot_quote(render_fact(f))};"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def partition_payload(partition: CdPartition) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "cd_validation",
        "accepted": True,
        "partition": {
            "entities": sorted(p.name for p in partition.entities),
            "relationships": sorted(p.name for p in partition.relationships),
            "attributes": sorted(p.name for p in partition.attributes),
        },
    }


def violations_payload(violations: list[CdViolation]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "cd_validation",
        "accepted": False,
        "violations": [
            {"condition": v.condition.value, "detail": v.detail} for v in violations
        ],
    }


def render_partition_text(partition: CdPartition) -> str:
    def names(preds) -> str:
        return ", ".join(sorted(p.name for p in preds)) or "(none)"

    return (
        "conceptual dependency set: ACCEPTED\n"
        f"  entities:      {names(partition.entities)}\n"
        f"  relationships: {names(partition.relationships)}\n"
        f"  attributes:    {names(partition.attributes)}\n"
    )


def render_violations_text(violations: list[CdViolation]) -> str:
    lines = ["conceptual dependency set: REJECTED"]
    for v in violations:
        lines.append(f"  ({v.condition.value}) {v.detail}")
    return "\n".join(lines) + "\n"


def answers_payload(
    query: ConjunctiveQuery, answers: AnswerSet, inconsistent: bool = False
) -> dict:
    if inconsistent:
        return {
            "format_version": FORMAT_VERSION,
            "kind": "answers",
            "query": query.render().strip(),
            "status": "inconsistent_database",
            "every_tuple_is_certain": True,
        }
    return {
        "format_version": FORMAT_VERSION,
        "kind": "answers",
        "query": query.render().strip(),
        "level_bound": answers.level_bound,
        "answers": [[c.render() for c in t] for t in answers.sorted_tuples()],
    }


def render_answers_text(query: ConjunctiveQuery, answers: AnswerSet) -> str:
    lines = [f"query: {query.render().strip()}"]
    if answers.level_bound is not None:
        lines.append(f"over facts at levels below {answers.level_bound}")
    if len(answers) == 0:
        lines.append("0 answers")
    else:
        lines.append(f"{len(answers)} answers:")
        for t in answers.sorted_tuples():
            lines.append("  <" + ", ".join(render_constant(c) for c in t) + ">")
    return "\n".join(lines) + "\n"


def containment_payload(result: ContainmentResult) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "containment",
        "verdict": result.verdict.value,
        "level_bound": result.level_bound,
        "vacuous": result.vacuous,
    }


def render_containment_text(result: ContainmentResult) -> str:
    line = result.verdict.value
    if result.vacuous:
        line += " (vacuously: the frozen chase failed, the query is unsatisfiable)"
    return f"{line} at level bound {result.level_bound}\n"


def growth_payload(verdict: RefutationVerdict) -> dict:
    report: GrowthReport = verdict.report
    low, high = report.delta_witness
    return {
        "format_version": FORMAT_VERSION,
        "kind": "growth_report",
        "n": verdict.n,
        "probe_level": verdict.probe_level,
        "e_fact_levels": {str(i): lvl for i, lvl in sorted(report.first_level_of_e_fact.items())},
        "max_level_of_constant": {
            str(i): lvl for i, lvl in sorted(report.max_level_of_constant.items())
        },
        "delta_witness": {"low": fact_payload(low), "high": fact_payload(high)},
        "excluded_at_probe": verdict.excluded_at_probe,
        "included_above_probe": verdict.included_above_probe,
        "gap": verdict.gap,
        "holds": verdict.holds,
    }


def render_growth_text(verdict: RefutationVerdict) -> str:
    report = verdict.report
    lines = [
        f"instance size n = {verdict.n}, probe level 2n-2 = {verdict.probe_level}",
        "levels of the e(i) facts:",
    ]
    for i, lvl in sorted(report.first_level_of_e_fact.items()):
        lines.append(f"  e({i}): level {lvl} (expected 2(i-1) = {2 * (i - 1)})")
    low, high = report.delta_witness
    lines += [
        f"constant {verdict.n} occurs at level {low.level} in {render_fact(low)}"
        f" and at level {high.level} in {render_fact(high)} (gap {verdict.gap})",
        f"query for e-membership over levels < {verdict.probe_level}: tuple <{verdict.n}>"
        + (" absent" if verdict.excluded_at_probe else " PRESENT (unexpected)"),
        f"same query over levels < {verdict.probe_level + 1}: tuple <{verdict.n}>"
        + (" present" if verdict.included_above_probe else " ABSENT (unexpected)"),
        f"verdict: {'holds' if verdict.holds else 'DISCREPANCY'}",
    ]
    return "\n".join(lines) + "\n"
