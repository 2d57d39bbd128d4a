"""Pipeline query language.

A pipeline is a source followed by ``|``-separated stages::

    compare(a, b) | filter(status=only_a) | tree(root=<p:proj>, predicate=<p:hasActivity>) | dot()

Sources: ``model(id)``, ``compare(a, b)``, ``compare3(ancestor, a, b)``.
Stage arguments are ``key=value`` with values that are quoted text, ``<iri>``,
numbers or bare keywords. The stage set and its type signatures live in
:data:`STAGES`; pipelines are type-checked before any model is loaded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Protocol, Union

from .compare import (
    Category,
    ComparisonModel,
    EntityChange,
    EntityStatus,
    Origin,
    ThreeWayModel,
    classify3,
    compare,
    conflicts,
    entity_changes,
)
from .errors import EvalError, PipelineSyntaxError, PipelineTypeError, ProcdiffError
from .model import (
    EMPTY_SCHEMA,
    Model,
    Node,
    PredicateKind,
    SchemaDescriptor,
    Statement,
    valid_iri,
)
from .report import (
    EntityChangeSet,
    MetricTable,
    TreeView,
    all_entity_extents,
    extract_tree,
    render_dot,
    render_json,
    render_table,
    text_attribute_rows,
    value_ids,
)

# -- syntax tree -------------------------------------------------------------


@dataclass(frozen=True)
class Iri:
    iri: str

    def __str__(self) -> str:
        return f"<{self.iri}>"


@dataclass(frozen=True)
class Quoted:
    text: str

    def __str__(self) -> str:
        return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True)
class Keyword:
    word: str

    def __str__(self) -> str:
        return self.word


ArgValue = Union[Iri, Quoted, Keyword, int, float]


@dataclass(frozen=True)
class Arg:
    key: str
    value: ArgValue

    def __str__(self) -> str:
        return f"{self.key}={self.value}"


@dataclass(frozen=True)
class Source:
    name: str
    ids: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.name}({', '.join(_format_id(i) for i in self.ids)})"


@dataclass(frozen=True)
class Stage:
    name: str
    args: tuple[Arg, ...] = ()
    offset: int = field(default=-1, compare=False)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(str(a) for a in self.args)})"

    def arg(self, key: str, default=None):
        for a in self.args:
            if a.key == key:
                return a.value
        return default


@dataclass(frozen=True)
class Pipeline:
    source: Source
    stages: tuple[Stage, ...] = ()

    def __str__(self) -> str:
        return " | ".join([str(self.source), *(str(s) for s in self.stages)])


_WORD_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")
_NUMBER_RE = re.compile(r"-?[0-9]+(\.[0-9]+)?$")
_NEGATIVE_RE = re.compile(r"-[0-9]+(\.[0-9]+)?")


def _format_id(id: str) -> str:
    return id if _WORD_RE.fullmatch(id) else str(Quoted(id))


def format_pipeline(p: Pipeline) -> str:
    return str(p)


# -- lexer / parser ------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # word, iri, string, punct, end
    text: str
    offset: int


def _lex(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()|,=":
            tokens.append(_Token("punct", ch, i))
            i += 1
        elif ch == "<":
            end = text.find(">", i + 1)
            if end < 0:
                raise PipelineSyntaxError("unterminated IRI", i)
            iri = text[i + 1 : end]
            if not valid_iri(iri):
                raise PipelineSyntaxError(f"malformed IRI <{iri}>", i)
            tokens.append(_Token("iri", iri, i))
            i = end + 1
        elif ch == '"':
            out = []
            j = i + 1
            while True:
                if j >= len(text):
                    raise PipelineSyntaxError("unterminated string", i)
                c = text[j]
                if c == "\\" and j + 1 < len(text) and text[j + 1] in '"\\':
                    out.append(text[j + 1])
                    j += 2
                elif c == '"':
                    break
                else:
                    out.append(c)
                    j += 1
            tokens.append(_Token("string", "".join(out), i))
            i = j + 1
        else:
            m = (_NEGATIVE_RE if ch == "-" else _WORD_RE).match(text, i)
            if not m:
                raise PipelineSyntaxError(f"unexpected character {ch!r}", i)
            tokens.append(_Token("word", m.group(), i))
            i = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def expect(self, punct: str) -> _Token:
        tok = self.tok
        if tok.kind != "punct" or tok.text != punct:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise PipelineSyntaxError(f"expected {punct!r}, found {found}", tok.offset)
        self.pos += 1
        return tok

    def accept(self, punct: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == punct:
            self.pos += 1
            return True
        return False

    def name(self, what: str) -> _Token:
        tok = self.tok
        if tok.kind != "word" or not tok.text[0].isalpha():
            raise PipelineSyntaxError(f"expected {what} name", tok.offset)
        self.pos += 1
        return tok

    def pipeline(self) -> Pipeline:
        source = self.source()
        stages = []
        while self.accept("|"):
            stages.append(self.stage())
        if self.tok.kind != "end":
            raise PipelineSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return Pipeline(source, tuple(stages))

    def source(self) -> Source:
        name = self.name("source")
        if name.text not in SOURCES:
            raise PipelineSyntaxError(
                f"unknown source {name.text!r} (expected one of {', '.join(SOURCES)})", name.offset
            )
        self.expect("(")
        ids = []
        if not self.accept(")"):
            while True:
                tok = self.tok
                if tok.kind not in ("word", "string"):
                    raise PipelineSyntaxError("expected a model id", tok.offset)
                ids.append(tok.text)
                self.pos += 1
                if self.accept(")"):
                    break
                self.expect(",")
        arity = SOURCES[name.text]
        if len(ids) != arity:
            raise PipelineSyntaxError(
                f"{name.text}() takes {arity} model id(s), got {len(ids)}", name.offset
            )
        return Source(name.text, tuple(ids))

    def stage(self) -> Stage:
        name = self.name("stage")
        spec = STAGES.get(name.text)
        if spec is None:
            raise PipelineSyntaxError(f"unknown stage {name.text!r}", name.offset)
        self.expect("(")
        args: list[Arg] = []
        if not self.accept(")"):
            while True:
                key = self.name("argument")
                self.expect("=")
                args.append(Arg(key.text, self.value()))
                self._check_arg(spec, args[-1], key.offset)
                if self.accept(")"):
                    break
                self.expect(",")
        keys = [a.key for a in args]
        for k in keys:
            if keys.count(k) > 1:
                raise PipelineSyntaxError(f"{name.text}(): duplicate argument {k!r}", name.offset)
        missing = [k for k in spec.required if k not in keys]
        if missing:
            raise PipelineSyntaxError(
                f"{name.text}(): missing argument(s) {', '.join(missing)}", name.offset
            )
        if spec.min_args and len(args) < spec.min_args:
            raise PipelineSyntaxError(f"{name.text}() needs at least one argument", name.offset)
        return Stage(name.text, tuple(args), name.offset)

    def value(self) -> ArgValue:
        tok = self.tok
        self.pos += 1
        if tok.kind == "iri":
            return Iri(tok.text)
        if tok.kind == "string":
            return Quoted(tok.text)
        if tok.kind == "word":
            if _NUMBER_RE.match(tok.text):
                return float(tok.text) if "." in tok.text else int(tok.text)
            return Keyword(tok.text)
        raise PipelineSyntaxError("expected an argument value", tok.offset)

    @staticmethod
    def _check_arg(spec: StageSpec, arg: Arg, offset: int) -> None:
        check = spec.params.get(arg.key)
        if check is None:
            raise PipelineSyntaxError(
                f"{spec.name}(): unknown argument {arg.key!r}", offset
            )
        problem = check(arg.value)
        if problem:
            raise PipelineSyntaxError(f"{spec.name}(): {arg.key} {problem}", offset)


def parse_pipeline(text: str) -> Pipeline:
    return _Parser(text).pipeline()


# -- types and stage catalog -------------------------------------------------


class VType(str, Enum):
    PLAIN = "StatementSet"
    DECORATED = "decorated StatementSet"
    THREEWAY = "3-way StatementSet"
    ENTITIES = "EntityChangeSet"
    TREE = "TreeView"
    METRICS = "MetricTable"
    RENDERING = "Rendering"


STATEMENT_TYPES = frozenset({VType.PLAIN, VType.DECORATED, VType.THREEWAY})
SOURCES = {"model": 1, "compare": 2, "compare3": 3}
SOURCE_TYPES = {"model": VType.PLAIN, "compare": VType.DECORATED, "compare3": VType.THREEWAY}


@dataclass(frozen=True)
class Rendering:
    text: str
    format: str


class ModelSource(Protocol):
    schema: SchemaDescriptor

    def load(self, id: str) -> Model: ...


@dataclass
class MemoryRepository:
    """In-memory stand-in for a repository: a mapping of id to model."""

    models: Mapping[str, Model]
    schema: SchemaDescriptor = EMPTY_SCHEMA

    def load(self, id: str) -> Model:
        try:
            return self.models[id]
        except KeyError:
            raise EvalError(f"unknown model id {id!r}") from None


def _is_iri(v) -> str | None:
    return None if isinstance(v, Iri) else "must be an <iri>"


def _one_of(*words: str):
    def check(v) -> str | None:
        if isinstance(v, Keyword) and v.word in words:
            return None
        return f"must be one of {'|'.join(words)}"

    return check


def _non_negative_int(v) -> str | None:
    if isinstance(v, int) and not isinstance(v, bool) and v >= 0:
        return None
    return "must be a non-negative integer"


@dataclass(frozen=True)
class StageSpec:
    name: str
    params: Mapping[str, Callable[[ArgValue], str | None]]
    typing: Callable[[Stage, VType], VType | tuple[str, VType]]
    run: Callable[[Stage, object, "Context"], object]
    required: tuple[str, ...] = ()
    min_args: int = 0


@dataclass
class Context:
    schema: SchemaDescriptor


def _expect(accepted: frozenset[VType] | VType, result: VType | None = None):
    """Typing rule: accept the given input types, output ``result`` (or the input type)."""
    if isinstance(accepted, VType):
        accepted = frozenset({accepted})

    def rule(stage: Stage, actual: VType):
        if actual not in accepted:
            return (_describe(accepted), actual)
        return result if result is not None else actual

    return rule


def _describe(types: frozenset[VType]) -> str:
    if types == STATEMENT_TYPES:
        return "a StatementSet"
    return " or ".join(sorted(t.value for t in types))


def _filter_typing(stage: Stage, actual: VType):
    keys = {a.key for a in stage.args}
    if "status" in keys and "category" in keys:
        return ("a single statement decoration (status or category, not both)", actual)
    if "status" in keys:
        return _expect(VType.DECORATED)(stage, actual)
    if "category" in keys:
        return _expect(VType.THREEWAY)(stage, actual)
    return _expect(STATEMENT_TYPES)(stage, actual)


def _filter_run(stage: Stage, value, ctx: Context):
    conds: list[Callable[[Statement, object], bool]] = []
    for arg in stage.args:
        v = arg.value
        if arg.key == "status":
            origin = Origin(v.word)
            conds.append(lambda s, d, o=origin: d is o)
        elif arg.key == "category":
            cat = Category(v.word)
            conds.append(lambda s, d, c=cat: d.category is c)
        elif arg.key == "predicate":
            node = Node(v.iri)
            conds.append(lambda s, d, n=node: s.predicate == n)
        elif arg.key == "subject":
            node = Node(v.iri)
            conds.append(lambda s, d, n=node: s.subject == n)
        elif arg.key == "kind":
            kind = PredicateKind(v.word)
            if kind is PredicateKind.STRUCTURAL:
                conds.append(lambda s, d: ctx.schema.is_structural(s.predicate))
            else:
                conds.append(lambda s, d, k=kind: ctx.schema.kind(s.predicate) is k)
    return _select(value, lambda s, d: all(c(s, d) for c in conds))


def _select(value, keep: Callable[[Statement, object], bool]):
    if isinstance(value, Model):
        return Model(value.id, frozenset(s for s in value.statements if keep(s, None)))
    if isinstance(value, ComparisonModel):
        return ComparisonModel(
            value.a_id, value.b_id, {s: d for s, d in value.entries.items() if keep(s, d)}
        )
    return ThreeWayModel(
        value.ancestor_id,
        value.a_id,
        value.b_id,
        {s: d for s, d in value.entries.items() if keep(s, d)},
    )


def _statements_of(value) -> frozenset[Statement] | dict:
    return value.statements if isinstance(value, Model) else value.entries


def _neighborhood_run(stage: Stage, value, ctx: Context):
    center = Node(stage.arg("node").iri)
    depth = stage.arg("depth", 1)
    statements = _statements_of(value)
    ball = {center}
    for _ in range(max(depth - 1, 0)):
        grown = set(ball)
        for s in statements:
            if s.subject in ball and isinstance(s.object, Node):
                grown.add(s.object)
            elif s.object in ball:
                grown.add(s.subject)
        if grown == ball:
            break
        ball = grown
    if depth == 0:
        return _select(value, lambda s, d: False)
    return _select(value, lambda s, d: s.subject in ball or s.object in ball)


def _entities_run(stage: Stage, value: ComparisonModel, ctx: Context):
    return EntityChangeSet(
        entity_changes(value.side_a(), value.side_b()), None, value.a_id, value.b_id
    )


def _conflicts_run(stage: Stage, value: ThreeWayModel, ctx: Context):
    report = conflicts(value)
    changes = [
        EntityChange(c.entity, EntityStatus.MODIFIED, c.predicates) for c in report.conflicts
    ]
    return EntityChangeSet(changes, report, value.a_id, value.b_id, value.ancestor_id)


def _tree_run(stage: Stage, value, ctx: Context):
    return extract_tree(value, Node(stage.arg("root").iri), Node(stage.arg("predicate").iri), ctx.schema)


def _textdiff_run(stage: Stage, value: ComparisonModel, ctx: Context):
    predicate = Node(stage.arg("predicate").iri)
    rows = text_attribute_rows(value.side_a(), value.side_b(), predicate, changed_only=False)
    return MetricTable(rows, value.a_id, value.b_id)


def _extent_run(stage: Stage, value: ComparisonModel, ctx: Context):
    return MetricTable(
        all_entity_extents(value.side_a(), value.side_b(), ctx.schema), value.a_id, value.b_id
    )


_ANY_VALUE = frozenset(VType) - {VType.RENDERING}
_STATUS = _one_of(*(o.value for o in Origin))
_CATEGORY = _one_of(*(c.value for c in Category))
_KIND = _one_of(*(k.value for k in PredicateKind))

STAGES: dict[str, StageSpec] = {
    spec.name: spec
    for spec in [
        StageSpec(
            "filter",
            {"status": _STATUS, "category": _CATEGORY, "predicate": _is_iri, "subject": _is_iri, "kind": _KIND},
            _filter_typing,
            _filter_run,
            min_args=1,
        ),
        StageSpec("entities", {}, _expect(VType.DECORATED, VType.ENTITIES), _entities_run),
        StageSpec("conflicts", {}, _expect(VType.THREEWAY, VType.ENTITIES), _conflicts_run),
        StageSpec(
            "tree",
            {"root": _is_iri, "predicate": _is_iri},
            _expect(STATEMENT_TYPES, VType.TREE),
            _tree_run,
            required=("root", "predicate"),
        ),
        StageSpec(
            "neighborhood",
            {"node": _is_iri, "depth": _non_negative_int},
            _expect(STATEMENT_TYPES),
            _neighborhood_run,
            required=("node",),
        ),
        StageSpec(
            "textdiff",
            {"predicate": _is_iri},
            _expect(VType.DECORATED, VType.METRICS),
            _textdiff_run,
            required=("predicate",),
        ),
        StageSpec("extent", {}, _expect(VType.DECORATED, VType.METRICS), _extent_run),
        StageSpec(
            "table",
            {},
            _expect(_ANY_VALUE, VType.RENDERING),
            lambda st, v, ctx: Rendering(render_table(v), "table"),
        ),
        StageSpec(
            "json",
            {},
            _expect(_ANY_VALUE, VType.RENDERING),
            lambda st, v, ctx: Rendering(render_json(v), "json"),
        ),
        StageSpec(
            "dot",
            {},
            _expect(VType.TREE, VType.RENDERING),
            lambda st, v, ctx: Rendering(render_dot(v), "dot"),
        ),
    ]
}


def typecheck(pipeline: Pipeline, catalog: Mapping[str, StageSpec] = STAGES) -> list[VType]:
    """Return the value type after the source and after each stage, or raise PipelineTypeError."""
    current = SOURCE_TYPES[pipeline.source.name]
    chain = [current]
    for index, stage in enumerate(pipeline.stages, start=1):
        spec = catalog.get(stage.name)
        if spec is None:
            raise PipelineTypeError(index, stage.name, "a registered stage", "unknown stage")
        result = spec.typing(stage, current)
        if isinstance(result, tuple):
            expected, actual = result
            raise PipelineTypeError(index, stage.name, expected, actual.value)
        current = result
        chain.append(current)
    return chain


def _load_source(source: Source, repo: ModelSource):
    try:
        models = [repo.load(i) for i in source.ids]
    except EvalError:
        raise
    except ProcdiffError as exc:
        raise EvalError(str(exc)) from exc
    if source.name == "model":
        return models[0]
    if source.name == "compare":
        return compare(*models)
    return classify3(*models)


def evaluate(pipeline: Pipeline | str, repo: ModelSource):
    """Fold the stages over the source value. Errors carry the failing stage index."""
    if isinstance(pipeline, str):
        pipeline = parse_pipeline(pipeline)
    typecheck(pipeline)
    ctx = Context(repo.schema)
    value = _load_source(pipeline.source, repo)
    for index, stage in enumerate(pipeline.stages, start=1):
        try:
            value = STAGES[stage.name].run(stage, value, ctx)
        except EvalError:
            raise
        except ProcdiffError as exc:
            raise EvalError(f"{stage.name}: {exc}", index) from exc
    return value


def render(value) -> str:
    """Text for the final pipeline value; non-rendering values are shown as a table."""
    if isinstance(value, Rendering):
        return value.text
    return render_table(value)


__all__ = [
    "Arg",
    "Iri",
    "Keyword",
    "MemoryRepository",
    "Pipeline",
    "Quoted",
    "Rendering",
    "STAGES",
    "Source",
    "Stage",
    "VType",
    "evaluate",
    "format_pipeline",
    "parse_pipeline",
    "render",
    "typecheck",
    "value_ids",
]
