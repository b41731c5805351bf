"""Command-line front end.

Subcommands: ``validate`` a dependency set, ``chase`` an instance, ``query``
it for certain answers over a level-bounded prefix, check query
``contain``-ment, and ``repro`` the level-growth experiment.

Exit codes: 0 success, 2 dependency set rejected, 3 chase failed
(inconsistent database), 4 budget exhausted before the requested output was
materialized, 5 input error.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

from . import render
from .chase import ChaseBudget, ChaseStatus, run_chase
from .counterexample import build_counterexample, refute_constant_bounds
from .dsl import (
    ParseError,
    parse_database,
    parse_dependencies,
    parse_queries,
    parse_query,
    serialize_dependencies,
)
from .query import (
    FailedChaseError,
    PrefixNotMaterializedError,
    check_containment,
    evaluate_over_prefix,
)
from .validator import CdPartition, validate_cd_set

__all__ = ["main", "console_main"]

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_CHASE_FAILED = 3
EXIT_BUDGET = 4
EXIT_INPUT = 5

DEFAULT_MAX_STEPS = 10_000


class _InputError(Exception):
    def __init__(self, category: str, message: str):
        self.category = category
        self.message = message
        super().__init__(message)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise _InputError("io", f"cannot read {path}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise _InputError("io", f"{path} is not valid UTF-8: {exc}") from exc


def _load_schema_deps(args):
    schema = parse_schema_file(args.schema)
    deps = parse_dependencies(_read(args.deps), schema, args.deps)
    return schema, deps


def parse_schema_file(path: str):
    from .dsl import parse_schema

    return parse_schema(_read(path), path)


def _budget(args, max_level=None) -> ChaseBudget:
    max_steps = getattr(args, "max_steps", None)
    if max_steps is None:
        max_steps = DEFAULT_MAX_STEPS
    if max_level is None:
        max_level = getattr(args, "max_level", None)
    return ChaseBudget(max_steps=max_steps, max_level=max_level)


def _cmd_validate(args) -> int:
    schema, deps = _load_schema_deps(args)
    result = validate_cd_set(schema, deps)
    if isinstance(result, CdPartition):
        if args.format == "json":
            sys.stdout.write(render.to_canonical_json(render.partition_payload(result)))
        else:
            sys.stdout.write(render.render_partition_text(result))
        return EXIT_OK
    if args.format == "json":
        sys.stdout.write(render.to_canonical_json(render.violations_payload(result)))
    else:
        sys.stdout.write(render.render_violations_text(result))
    return EXIT_REJECTED


def _cmd_chase(args) -> int:
    schema, deps = _load_schema_deps(args)
    db = parse_database(_read(args.data), schema, args.data)
    state = run_chase(db, deps, _budget(args), keep_trace=args.trace)
    if args.format == "json":
        sys.stdout.write(
            render.to_canonical_json(render.chase_payload(state, include_trace=args.trace))
        )
    elif args.format == "dot":
        sys.stdout.write(render.render_chase_dot(state))
    else:
        sys.stdout.write(render.render_chase_text(state, include_trace=args.trace))
    if state.status is ChaseStatus.FAILED:
        print("error: chase-failed: the chase does not exist", file=sys.stderr)
        return EXIT_CHASE_FAILED
    if state.status is ChaseStatus.ACTIVE:
        print("error: budget-exhausted: the chase is still active", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


def _cmd_query(args) -> int:
    schema, deps = _load_schema_deps(args)
    db = parse_database(_read(args.data), schema, args.data)
    queries = parse_queries(_read(args.query), schema, args.query)
    if not queries:
        raise _InputError("syntax", f"{args.query} contains no query")
    budget = _budget(args, max_level=max(args.level - 1, 0))
    state = run_chase(db, deps, budget)
    out = []
    code = EXIT_OK
    for q in queries:
        if state.status is ChaseStatus.FAILED:
            if args.format == "json":
                out.append(render.to_canonical_json(render.answers_payload(q, None, inconsistent=True)))
            else:
                out.append(
                    f"query: {q.render().strip()}\n"
                    "inconsistent database: the chase failed;"
                    " every tuple is (vacuously) certain\n"
                )
            code = EXIT_CHASE_FAILED
            continue
        answers = evaluate_over_prefix(state, q, args.level)
        if args.format == "json":
            out.append(render.to_canonical_json(render.answers_payload(q, answers)))
        else:
            out.append(render.render_answers_text(q, answers))
    sys.stdout.write("".join(out))
    return code


def _cmd_contain(args) -> int:
    schema, deps = _load_schema_deps(args)
    q1 = parse_query(_read(args.q1), schema, args.q1)
    q2 = parse_query(_read(args.q2), schema, args.q2)
    max_steps = args.max_steps if args.max_steps is not None else DEFAULT_MAX_STEPS
    result = check_containment(q1, q2, deps, args.level, max_steps=max_steps)
    if args.format == "json":
        sys.stdout.write(render.to_canonical_json(render.containment_payload(result)))
    else:
        sys.stdout.write(render.render_containment_text(result))
    return EXIT_OK


def _cmd_repro(args) -> int:
    if args.n < 2:
        raise _InputError("range", "--n must be at least 2")
    verdict = refute_constant_bounds(args.n)
    if args.dot:
        _, deps, db = build_counterexample(args.n)
        state = run_chase(db, deps, ChaseBudget(max_level=2 * args.n - 2))
        sys.stdout.write(render.render_chase_dot(state, title=f"growth n={args.n}"))
    elif args.json:
        sys.stdout.write(render.to_canonical_json(render.growth_payload(verdict)))
    else:
        sys.stdout.write(render.render_growth_text(verdict))
        if args.show_deps:
            _, deps, _ = build_counterexample(args.n)
            sys.stdout.write(serialize_dependencies(deps))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdchase",
        description=(
            "Deterministic leveled chase for key and inclusion dependencies, "
            "with dependency-set validation and certain-answer queries."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_schema_deps(p):
        p.add_argument("--schema", required=True, help="schema file")
        p.add_argument("--deps", required=True, help="dependency file")

    p = sub.add_parser("validate", help="check that the dependencies encode an EER schema")
    add_schema_deps(p)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("chase", help="chase an instance")
    add_schema_deps(p)
    p.add_argument("--data", required=True, help="instance file")
    p.add_argument("--max-steps", type=int, default=None,
                   help=f"inclusion-step budget (default {DEFAULT_MAX_STEPS})")
    p.add_argument("--max-level", type=int, default=None,
                   help="deepest fact level to materialize")
    p.add_argument("--trace", action="store_true", help="record and print every step")
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p.set_defaults(func=_cmd_chase)

    p = sub.add_parser("query", help="certain answers over a chase prefix")
    add_schema_deps(p)
    p.add_argument("--data", required=True)
    p.add_argument("--query", required=True, help="query file")
    p.add_argument("--level", type=int, required=True,
                   help="answer over facts at levels below this bound")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("contain", help="containment of --q1 in --q2 up to a level")
    add_schema_deps(p)
    p.add_argument("--q1", required=True, help="query file, candidate subsumee")
    p.add_argument("--q2", required=True, help="query file, candidate subsumer")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=_cmd_contain)

    p = sub.add_parser("repro", help="run the level-growth experiment for one size")
    p.add_argument("--n", type=int, required=True, help="instance size, at least 2")
    p.add_argument("--json", action="store_true", help="canonical JSON report")
    p.add_argument("--dot", action="store_true", help="derivation forest as DOT")
    p.add_argument("--show-deps", action="store_true",
                   help="also print the generated dependency file")
    p.set_defaults(func=_cmd_repro)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _InputError as exc:
        print(f"error: {exc.category}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    except PrefixNotMaterializedError as exc:
        print(f"error: budget-exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FailedChaseError as exc:
        print(f"error: chase-failed: {exc}", file=sys.stderr)
        return EXIT_CHASE_FAILED


def console_main() -> None:
    sys.exit(main())
