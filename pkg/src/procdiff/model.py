"""Triple data model: node/literal terms, statements, models and schema descriptors."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Union

from .errors import ModelError

_FORBIDDEN_IRI_CHARS = frozenset('<>"')


def valid_iri(iri: str) -> bool:
    if not iri:
        return False
    for ch in iri:
        if ch <= " " or ch in _FORBIDDEN_IRI_CHARS:
            return False
    return True


@dataclass(frozen=True, slots=True)
class Node:
    """An entity or predicate identifier. Matching is by exact IRI text."""

    iri: str

    def __post_init__(self) -> None:
        if not valid_iri(self.iri):
            raise ModelError(f"invalid IRI: {self.iri!r}")

    def __str__(self) -> str:
        return f"<{self.iri}>"


@dataclass(frozen=True, slots=True)
class Literal:
    text: str

    def __str__(self) -> str:
        return '"' + escape_literal(self.text) + '"'


Term = Union[Node, Literal]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def escape_literal(text: str) -> str:
    if not any(ch in _ESCAPES for ch in text):
        return text
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


class Statement(NamedTuple):
    subject: Node
    predicate: Node
    object: Term

    def __str__(self) -> str:
        return f"{self.subject} {self.predicate} {self.object} ."


def canonical_key(s: Statement) -> tuple[bytes, bytes, int, bytes]:
    """Sort key: subject, predicate, nodes before literals, object spelling (bytewise)."""
    obj = s.object
    if isinstance(obj, Node):
        return (s.subject.iri.encode(), s.predicate.iri.encode(), 0, obj.iri.encode())
    return (s.subject.iri.encode(), s.predicate.iri.encode(), 1, obj.text.encode())


def canonical_order(statements: Iterable[Statement]) -> list[Statement]:
    return sorted(statements, key=canonical_key)


def node_key(node: Node) -> bytes:
    return node.iri.encode()


def triple(subject: str, predicate: str, obj: str | Term) -> Statement:
    """Convenience constructor; a bare string object is taken as an IRI."""
    if isinstance(obj, str):
        obj = Node(obj)
    return Statement(Node(subject), Node(predicate), obj)


@dataclass(frozen=True)
class Model:
    """One process-model variant: an identifier plus a duplicate-free statement set."""

    id: str
    statements: frozenset[Statement] = frozenset()

    def __post_init__(self) -> None:
        if not self.id:
            raise ModelError("model id must be non-empty")
        if not isinstance(self.statements, frozenset):
            object.__setattr__(self, "statements", frozenset(self.statements))

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)

    def __contains__(self, s: object) -> bool:
        return s in self.statements

    def with_statements(self, statements: Iterable[Statement]) -> Model:
        return Model(self.id, frozenset(statements))


def insert(model: Model, s: Statement) -> Model:
    if s in model.statements:
        return model
    return Model(model.id, model.statements | {s})


class SetOp(str, Enum):
    UNION = "union"
    INTERSECTION = "intersection"
    DIFFERENCE = "difference"


def set_op(a: Iterable[Statement], b: Iterable[Statement], op: SetOp | str) -> frozenset[Statement]:
    a, b = frozenset(a), frozenset(b)
    op = SetOp(op)
    if op is SetOp.UNION:
        return a | b
    if op is SetOp.INTERSECTION:
        return a & b
    return a - b


def statements_about(model: Model | Iterable[Statement], entity: Node) -> frozenset[Statement]:
    return frozenset(s for s in model if s.subject == entity)


def subjects(model: Model | Iterable[Statement]) -> frozenset[Node]:
    return frozenset(s.subject for s in model)


def group_by_subject(statements: Iterable[Statement]) -> dict[Node, set[Statement]]:
    groups: dict[Node, set[Statement]] = defaultdict(set)
    for s in statements:
        groups[s.subject].add(s)
    return groups


class PredicateKind(str, Enum):
    STRUCTURAL = "structural"
    TEXT = "text"
    HIERARCHY = "hierarchy"
    IGNORE = "ignore"


@dataclass(frozen=True)
class SchemaDescriptor:
    """Predicate classification. Undeclared predicates are structural."""

    entries: Mapping[Node, PredicateKind] = field(default_factory=dict)

    def kind(self, predicate: Node) -> PredicateKind:
        return self.entries.get(predicate, PredicateKind.STRUCTURAL)

    def is_structural(self, predicate: Node) -> bool:
        # hierarchy predicates take part in structural comparison too
        return self.kind(predicate) in (PredicateKind.STRUCTURAL, PredicateKind.HIERARCHY)

    def is_text(self, predicate: Node) -> bool:
        return self.kind(predicate) is PredicateKind.TEXT

    def is_ignored(self, predicate: Node) -> bool:
        return self.kind(predicate) is PredicateKind.IGNORE

    def text_predicates(self) -> list[Node]:
        return sorted(
            (p for p, k in self.entries.items() if k is PredicateKind.TEXT), key=node_key
        )

    def name_predicate(self) -> Node | None:
        """First text predicate whose local name is ``name``; used for labels."""
        for p in self.text_predicates():
            if local_name(p.iri) == "name":
                return p
        return None


def local_name(iri: str) -> str:
    for sep in ("#", "/", ":"):
        if sep in iri:
            iri = iri.rsplit(sep, 1)[1]
    return iri


EMPTY_SCHEMA = SchemaDescriptor()
