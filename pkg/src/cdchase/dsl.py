"""Line-oriented text formats for schemata, dependencies, instances, queries.

    schema      predicate works_in/2
    deps        key works_in {1}
                inclusion works_in[1] <= employee[1]
    instance    works_in(m,"R&D")
    query       q(X) :- works_in(X,Y), dept(Y).

Comments start with ``#`` outside quotes.  Constants are bare words
(letters, digits, underscores, no leading underscore) or double-quoted
strings with backslash escapes.  In queries a capitalized bare word is a
variable, so constants there must start lower case or be quoted.  Words
shaped like ``_f<k>`` or ``_frz<k>`` are reserved for fresh and frozen
constants and are rejected in input anywhere.

Serialization is canonical: lines are emitted in the sort-key order of what
they describe, and constants that would not re-parse as bare words are
quoted.  Parsing canonical output yields structures equal to the originals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    Constant,
    Database,
    DependencySet,
    Fact,
    InclusionDependency,
    KeyDependency,
    Predicate,
    Schema,
    dependency_sort_key,
    dom,
    fact_sort_key,
)
from .query import Atom, ConjunctiveQuery, Var

__all__ = [
    "ParseError",
    "parse_schema",
    "parse_dependencies",
    "parse_database",
    "parse_queries",
    "parse_query",
    "render_constant",
    "serialize_schema",
    "serialize_dependencies",
    "serialize_database",
    "serialize_query",
]

_NAME_RE = re.compile(r"\A[A-Za-z_][A-Za-z0-9_]*\Z")
_BARE_CONSTANT_RE = re.compile(r"\A[A-Za-z0-9][A-Za-z0-9_]*\Z")
_BARE_OUTPUT_RE = re.compile(r"\A[a-z0-9][A-Za-z0-9_]*\Z")
_RESERVED_RE = re.compile(r"\A_f(rz)?[0-9]+\Z")
_WORD_CHARS = re.compile(r"[A-Za-z0-9_]")


class ParseError(ValueError):
    """Input rejection with position and a machine-parsable category."""

    def __init__(self, path: str, line: int, col: int, category: str, message: str):
        self.path = path
        self.line = line
        self.col = col
        self.category = category
        self.message = message
        super().__init__(f"{path}:{line}:{col}: [{category}] {message}")


@dataclass(frozen=True)
class _Token:
    kind: str  # "word" | "string" | "sym"
    value: str
    col: int


def _lex_line(text: str, path: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "#":
            break
        col = i + 1
        if ch == '"':
            i += 1
            out = []
            while i < n:
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '\\"':
                        raise ParseError(path, lineno, i + 1, "syntax", "bad escape")
                    out.append(text[i + 1])
                    i += 2
                elif c == '"':
                    i += 1
                    break
                else:
                    out.append(c)
                    i += 1
            else:
                raise ParseError(path, lineno, col, "syntax", "unterminated string")
            tokens.append(_Token("string", "".join(out), col))
            continue
        if _WORD_CHARS.match(ch):
            j = i
            while j < n and _WORD_CHARS.match(text[j]):
                j += 1
            tokens.append(_Token("word", text[i:j], col))
            i = j
            continue
        if text.startswith("<=", i):
            tokens.append(_Token("sym", "<=", col))
            i += 2
            continue
        if text.startswith(":-", i):
            tokens.append(_Token("sym", ":-", col))
            i += 2
            continue
        if ch in "()[]{},/.":
            tokens.append(_Token("sym", ch, col))
            i += 1
            continue
        raise ParseError(path, lineno, col, "syntax", f"unexpected character {ch!r}")
    return tokens


class _Cursor:
    def __init__(self, tokens: list[_Token], path: str, lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.path = path
        self.lineno = lineno

    def _col(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].col
        return self.tokens[-1].col + len(self.tokens[-1].value) if self.tokens else 1

    def error(self, category: str, message: str) -> ParseError:
        return ParseError(self.path, self.lineno, self._col(), category, message)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self.error("syntax", "unexpected end of line")
        self.pos += 1
        return tok

    def expect_sym(self, value: str) -> _Token:
        tok = self.next()
        if tok.kind != "sym" or tok.value != value:
            raise ParseError(
                self.path, self.lineno, tok.col, "syntax", f"expected {value!r}"
            )
        return tok

    def expect_word(self, what: str) -> _Token:
        tok = self.next()
        if tok.kind != "word":
            raise ParseError(self.path, self.lineno, tok.col, "syntax", f"expected {what}")
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(
                self.path, self.lineno, tok.col, "syntax", f"trailing {tok.value!r}"
            )

    def accept_sym(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.kind == "sym" and tok.value == value:
            self.pos += 1
            return True
        return False


def _lines(text: str, path: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _lex_line(raw, path, lineno)
        if tokens:
            yield _Cursor(tokens, path, lineno)


def _predicate_name(cur: _Cursor) -> _Token:
    tok = cur.expect_word("a predicate name")
    if not _NAME_RE.match(tok.value):
        raise ParseError(
            cur.path, cur.lineno, tok.col, "syntax", f"bad predicate name {tok.value!r}"
        )
    return tok


def _lookup(cur: _Cursor, schema: Schema, tok: _Token) -> Predicate:
    pred = schema.get(tok.value)
    if pred is None:
        raise ParseError(
            cur.path, cur.lineno, tok.col, "unknown-predicate",
            f"predicate {tok.value!r} is not declared",
        )
    return pred


def _positions(cur: _Cursor, close: str) -> tuple[int, ...]:
    out: list[int] = []
    while True:
        tok = cur.expect_word("a position")
        if not tok.value.isdigit() or int(tok.value) < 1:
            raise ParseError(
                cur.path, cur.lineno, tok.col, "position",
                f"positions are 1-based integers, got {tok.value!r}",
            )
        out.append(int(tok.value))
        tok = cur.next()
        if tok.kind == "sym" and tok.value == close:
            return tuple(out)
        if not (tok.kind == "sym" and tok.value == ","):
            raise ParseError(cur.path, cur.lineno, tok.col, "syntax", f"expected ',' or {close!r}")


def parse_schema(text: str, path: str = "<schema>") -> Schema:
    schema = Schema()
    for cur in _lines(text, path):
        kw = cur.expect_word("'predicate'")
        if kw.value != "predicate":
            raise ParseError(cur.path, cur.lineno, kw.col, "syntax", "expected 'predicate'")
        name = _predicate_name(cur)
        cur.expect_sym("/")
        arity = cur.expect_word("an arity")
        if not arity.value.isdigit() or int(arity.value) < 1:
            raise ParseError(cur.path, cur.lineno, arity.col, "arity", "arity must be a positive integer")
        cur.done()
        if name.value in schema:
            raise ParseError(
                cur.path, cur.lineno, name.col, "duplicate-predicate",
                f"predicate {name.value!r} declared twice",
            )
        schema.add(Predicate(name.value, int(arity.value)))
    return schema


def parse_dependencies(text: str, schema: Schema, path: str = "<deps>") -> DependencySet:
    ids: list[InclusionDependency] = []
    kds: list[KeyDependency] = []
    keyed: set[str] = set()
    for cur in _lines(text, path):
        kw = cur.expect_word("'key' or 'inclusion'")
        if kw.value == "key":
            name = _predicate_name(cur)
            pred = _lookup(cur, schema, name)
            cur.expect_sym("{")
            attrs = _positions(cur, "}")
            cur.done()
            if pred.arity < 2:
                raise ParseError(
                    cur.path, cur.lineno, name.col, "arity",
                    f"keys need arity >= 2, {pred!r} is unary",
                )
            if any(a > pred.arity for a in attrs):
                raise ParseError(
                    cur.path, cur.lineno, name.col, "position",
                    f"key position out of range for {pred!r}",
                )
            if pred.name in keyed:
                raise ParseError(
                    cur.path, cur.lineno, name.col, "duplicate-key",
                    f"second key for {pred!r}",
                )
            keyed.add(pred.name)
            kds.append(KeyDependency(pred, frozenset(attrs)))
        elif kw.value == "inclusion":
            lname = _predicate_name(cur)
            lhs = _lookup(cur, schema, lname)
            cur.expect_sym("[")
            lattrs = _positions(cur, "]")
            cur.expect_sym("<=")
            rname = _predicate_name(cur)
            rhs = _lookup(cur, schema, rname)
            cur.expect_sym("[")
            rattrs = _positions(cur, "]")
            cur.done()
            if len(lattrs) != len(rattrs):
                raise ParseError(
                    cur.path, cur.lineno, lname.col, "position",
                    "attribute lists must have equal length",
                )
            for pred, attrs, tok in ((lhs, lattrs, lname), (rhs, rattrs, rname)):
                if len(set(attrs)) != len(attrs):
                    raise ParseError(
                        cur.path, cur.lineno, tok.col, "position",
                        f"repeated position in {pred!r}",
                    )
                if any(a > pred.arity for a in attrs):
                    raise ParseError(
                        cur.path, cur.lineno, tok.col, "position",
                        f"position out of range for {pred!r}",
                    )
            ids.append(InclusionDependency(lhs, rhs, lattrs, rattrs))
        else:
            raise ParseError(
                cur.path, cur.lineno, kw.col, "syntax", "expected 'key' or 'inclusion'"
            )
    return DependencySet(tuple(ids), tuple(kds))


def _constant(cur: _Cursor, allow_upper_bare: bool) -> Constant:
    tok = cur.next()
    if tok.kind == "string":
        value = tok.value
    elif tok.kind == "word":
        if not _BARE_CONSTANT_RE.match(tok.value):
            raise ParseError(
                cur.path, cur.lineno, tok.col,
                "fresh-literal" if tok.value.startswith("_") else "syntax",
                f"bad constant {tok.value!r}",
            )
        if not allow_upper_bare and tok.value[0].isupper():
            raise ParseError(
                cur.path, cur.lineno, tok.col, "syntax",
                f"{tok.value!r} reads as a variable; quote it to make it a constant",
            )
        value = tok.value
    else:
        raise ParseError(cur.path, cur.lineno, tok.col, "syntax", "expected a constant")
    if _RESERVED_RE.match(value):
        raise ParseError(
            cur.path, cur.lineno, tok.col, "fresh-literal",
            f"{value!r} is reserved for generated constants",
        )
    return dom(value)


def parse_database(text: str, schema: Schema, path: str = "<data>") -> Database:
    facts: list[Fact] = []
    for cur in _lines(text, path):
        name = _predicate_name(cur)
        pred = _lookup(cur, schema, name)
        cur.expect_sym("(")
        args: list[Constant] = []
        if not cur.accept_sym(")"):
            while True:
                args.append(_constant(cur, allow_upper_bare=True))
                if cur.accept_sym(")"):
                    break
                cur.expect_sym(",")
        cur.done()
        if len(args) != pred.arity:
            raise ParseError(
                cur.path, cur.lineno, name.col, "arity",
                f"{pred!r} takes {pred.arity} arguments, got {len(args)}",
            )
        facts.append(Fact(pred, tuple(args), 0))
    return Database.of(facts)


def _term(cur: _Cursor):
    tok = cur.peek()
    if tok is not None and tok.kind == "word" and tok.value[0].isupper():
        cur.next()
        if not _NAME_RE.match(tok.value):
            raise ParseError(cur.path, cur.lineno, tok.col, "syntax", f"bad variable {tok.value!r}")
        return Var(tok.value)
    return _constant(cur, allow_upper_bare=False)


def _query_atom(cur: _Cursor, schema: Schema) -> Atom:
    name = _predicate_name(cur)
    pred = _lookup(cur, schema, name)
    cur.expect_sym("(")
    terms = []
    if not cur.accept_sym(")"):
        while True:
            terms.append(_term(cur))
            if cur.accept_sym(")"):
                break
            cur.expect_sym(",")
    if len(terms) != pred.arity:
        raise ParseError(
            cur.path, cur.lineno, name.col, "arity",
            f"{pred!r} takes {pred.arity} terms, got {len(terms)}",
        )
    return Atom(pred, tuple(terms))


def parse_queries(text: str, schema: Schema, path: str = "<query>") -> list[ConjunctiveQuery]:
    """One query per non-comment line, ``name(Vars) :- atoms.``"""
    queries: list[ConjunctiveQuery] = []
    for cur in _lines(text, path):
        name = _predicate_name(cur)
        cur.expect_sym("(")
        head: list[Var] = []
        if not cur.accept_sym(")"):
            while True:
                tok = cur.expect_word("a head variable")
                if not tok.value[0].isupper() or not _NAME_RE.match(tok.value):
                    raise ParseError(
                        cur.path, cur.lineno, tok.col, "syntax",
                        f"head terms must be variables, got {tok.value!r}",
                    )
                head.append(Var(tok.value))
                if cur.accept_sym(")"):
                    break
                cur.expect_sym(",")
        cur.expect_sym(":-")
        body: list[Atom] = []
        while True:
            body.append(_query_atom(cur, schema))
            if cur.accept_sym(","):
                continue
            break
        cur.accept_sym(".")
        cur.done()
        body_vars = {t for a in body for t in a.terms if isinstance(t, Var)}
        for v in head:
            if v not in body_vars:
                raise ParseError(
                    cur.path, cur.lineno, 1, "syntax",
                    f"head variable {v.name} does not occur in the body",
                )
        queries.append(ConjunctiveQuery(tuple(head), tuple(body), name.value))
    return queries


def parse_query(text: str, schema: Schema, path: str = "<query>") -> ConjunctiveQuery:
    queries = parse_queries(text, schema, path)
    if len(queries) != 1:
        raise ParseError(path, 1, 1, "syntax", f"expected exactly one query, got {len(queries)}")
    return queries[0]


# -- serialization ----------------------------------------------------------


def render_constant(c: Constant) -> str:
    """Bare when it re-parses as a lower-case constant, quoted otherwise."""
    if c.is_fresh:
        return c.render()
    if _BARE_OUTPUT_RE.match(c.name) and not _RESERVED_RE.match(c.name):
        return c.name
    escaped = c.name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def serialize_schema(schema: Schema) -> str:
    return "".join(f"predicate {p.name}/{p.arity}\n" for p in schema.predicates)


def _dep_line(dep) -> str:
    if isinstance(dep, KeyDependency):
        return f"key {dep.pred.name} {{{','.join(map(str, dep.sorted_attrs))}}}"
    lhs = ",".join(map(str, dep.lhs_attrs))
    rhs = ",".join(map(str, dep.rhs_attrs))
    return f"inclusion {dep.lhs_pred.name}[{lhs}] <= {dep.rhs_pred.name}[{rhs}]"


def serialize_dependencies(deps: DependencySet) -> str:
    all_deps = sorted(list(deps.ids) + list(deps.kds), key=dependency_sort_key)
    return "".join(_dep_line(d) + "\n" for d in all_deps)


def render_fact(f: Fact) -> str:
    return f"{f.pred.name}({','.join(render_constant(a) for a in f.args)})"


def serialize_database(db: Database) -> str:
    return "".join(render_fact(f) + "\n" for f in db.sorted_facts())


def serialize_query(q: ConjunctiveQuery) -> str:
    head = ",".join(v.name for v in q.head)
    parts = []
    for atom in q.body:
        terms = ",".join(
            t.name if isinstance(t, Var) else render_constant(t) for t in atom.terms
        )
        parts.append(f"{atom.pred.name}({terms})")
    return f"{q.name}({head}) :- {', '.join(parts)}.\n"
