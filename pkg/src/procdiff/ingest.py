"""Model importer: a strict, line-oriented N-Triples subset and the schema file format.

Grammar of one model line::

    <subject-iri> <predicate-iri> (<object-iri> | "literal") .

Literals support the escapes ``\\"``, ``\\\\``, ``\\n``, ``\\t`` and ``\\r`` only.
Blank nodes, datatypes and language tags are rejected. Lines starting with
``#`` (after optional whitespace) are comments; blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ModelError, ParseDiagnostic, ParseError
from .model import (
    Literal,
    Model,
    Node,
    PredicateKind,
    SchemaDescriptor,
    Statement,
    canonical_order,
    valid_iri,
)

_UNESCAPE = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_WS = " \t"


class _LineError(Exception):
    pass


def _physical_lines(source: str):
    # split on LF only: literals may legitimately contain other line separators
    for lineno, line in enumerate(source.split("\n"), start=1):
        if line.endswith("\r"):
            line = line[:-1]
        yield lineno, line


def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in _WS:
        pos += 1
    return pos


def _read_iri(line: str, pos: int) -> tuple[Node, int]:
    end = line.find(">", pos + 1)
    if end < 0:
        raise _LineError(f"unterminated IRI at column {pos + 1}")
    iri = line[pos + 1 : end]
    if not valid_iri(iri):
        raise _LineError(f"malformed IRI <{iri}> at column {pos + 1}")
    return Node(iri), end + 1


def _read_literal(line: str, pos: int) -> tuple[Literal, int]:
    out = []
    i = pos + 1
    while i < len(line):
        ch = line[i]
        if ch == '"':
            return Literal("".join(out)), i + 1
        if ch == "\\":
            if i + 1 >= len(line):
                break
            esc = line[i + 1]
            if esc not in _UNESCAPE:
                raise _LineError(f"bad escape \\{esc} at column {i + 1}")
            out.append(_UNESCAPE[esc])
            i += 2
            continue
        out.append(ch)
        i += 1
    raise _LineError(f"unterminated literal starting at column {pos + 1}")


def _read_term(line: str, pos: int, what: str, allow_literal: bool):
    if pos >= len(line) or line[pos] == ".":
        raise _LineError(f"missing {what}")
    ch = line[pos]
    if ch == "<":
        return _read_iri(line, pos)
    if line.startswith("_:", pos):
        raise _LineError(f"blank nodes are not supported ({what} at column {pos + 1})")
    if ch == '"':
        if not allow_literal:
            raise _LineError(f"{what} must be an IRI, not a literal")
        return _read_literal(line, pos)
    raise _LineError(f"unexpected character {ch!r} at column {pos + 1} while reading {what}")


def parse_statement(line: str) -> Statement:
    """Parse a single statement line (no comment handling)."""
    pos = _skip_ws(line, 0)
    subj, pos = _read_term(line, pos, "subject", allow_literal=False)
    pos = _skip_ws(line, pos)
    pred, pos = _read_term(line, pos, "predicate", allow_literal=False)
    pos = _skip_ws(line, pos)
    obj, pos = _read_term(line, pos, "object", allow_literal=True)
    if isinstance(obj, Literal) and pos < len(line) and line[pos] in "^@":
        raise _LineError("datatyped and language-tagged literals are not supported")
    pos = _skip_ws(line, pos)
    if pos >= len(line) or line[pos] != ".":
        raise _LineError("expected ' .' terminating the statement")
    pos = _skip_ws(line, pos + 1)
    if pos != len(line):
        raise _LineError(f"trailing content after '.' at column {pos + 1}")
    return Statement(subj, pred, obj)


def parse_model(source: str, id: str, source_name: str = "<input>") -> Model:
    """Parse model text into a :class:`Model`. Any syntax error aborts the parse."""
    statements = set()
    for lineno, line in _physical_lines(source):
        stripped = line.strip(_WS)
        if not stripped or stripped.startswith("#"):
            continue
        try:
            statements.add(parse_statement(line))
        except (_LineError, ModelError) as exc:
            raise ParseError([ParseDiagnostic(lineno, str(exc))], source_name) from None
    return Model(id, frozenset(statements))


def serialize_statements(statements) -> str:
    return "".join(f"{s}\n" for s in canonical_order(statements))


def serialize_model(model: Model) -> str:
    return serialize_statements(model.statements)


def load_model(path: str | Path, id: str | None = None) -> Model:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_model(text, id or path.stem, source_name=str(path))


def parse_schema(source: str, source_name: str = "<schema>") -> SchemaDescriptor:
    """Parse ``predicate <iri> kind=...`` declarations."""
    entries: dict[Node, PredicateKind] = {}
    for lineno, line in _physical_lines(source):
        stripped = line.strip(_WS)
        if not stripped or stripped.startswith("#"):
            continue

        def fail(msg: str):
            raise ParseError([ParseDiagnostic(lineno, msg)], source_name)

        parts = stripped.split()
        if len(parts) != 3 or parts[0] != "predicate":
            fail("expected 'predicate <iri> kind=<kind>'")
        iri_tok, kind_tok = parts[1], parts[2]
        if not (iri_tok.startswith("<") and iri_tok.endswith(">")) or not valid_iri(iri_tok[1:-1]):
            fail(f"malformed IRI {iri_tok}")
        if not kind_tok.startswith("kind="):
            fail(f"expected kind=..., got {kind_tok!r}")
        try:
            kind = PredicateKind(kind_tok[len("kind="):])
        except ValueError:
            fail(f"unknown kind {kind_tok[len('kind='):]!r}")
        predicate = Node(iri_tok[1:-1])
        if predicate in entries:
            fail(f"duplicate declaration for {predicate}")
        entries[predicate] = kind
    return SchemaDescriptor(entries)


def serialize_schema(schema: SchemaDescriptor) -> str:
    lines = sorted(f"predicate {p} kind={k.value}\n" for p, k in schema.entries.items())
    return "".join(lines)


def load_schema(path: str | Path) -> SchemaDescriptor:
    path = Path(path)
    return parse_schema(path.read_text(encoding="utf-8"), source_name=str(path))
