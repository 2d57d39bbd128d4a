import pytest
from hypothesis import given, strategies as st

from procdiff.compare import ComparisonModel, compare
from procdiff.errors import EvalError, PipelineSyntaxError, PipelineTypeError
from procdiff.model import Model
from procdiff.query import (
    STAGES,
    Arg,
    Iri,
    Keyword,
    MemoryRepository,
    Pipeline,
    Quoted,
    Rendering,
    Source,
    Stage,
    VType,
    evaluate,
    format_pipeline,
    parse_pipeline,
    render,
    typecheck,
)

from conftest import GOLDEN, UNIVERSE


def golden_cases():
    for line in (GOLDEN / "pipelines.txt").read_text().splitlines():
        name, pipeline = line.split("\t")
        yield pytest.param(pipeline, (GOLDEN / f"{name}.out").read_text(), id=name)


@pytest.mark.parametrize("pipeline, expected", list(golden_cases()))
def test_golden(repo, pipeline, expected):
    assert render(evaluate(parse_pipeline(pipeline), repo)) == expected


def test_golden_covers_catalog():
    used = set()
    for line in (GOLDEN / "pipelines.txt").read_text().splitlines():
        used |= {s.name for s in parse_pipeline(line.split("\t")[1]).stages}
        used.add(parse_pipeline(line.split("\t")[1]).source.name)
    assert set(STAGES) | {"model", "compare", "compare3"} <= used


def test_parse_well_formed():
    p = parse_pipeline("compare(a, b) | filter(status=only_a) | table()")
    assert p.source == Source("compare", ("a", "b"))
    assert p.stages == (Stage("filter", (Arg("status", Keyword("only_a")),)), Stage("table"))


@pytest.mark.parametrize(
    "text, offset",
    [
        ("compare(a b)", 10),
        ("model(a) | frobnicate()", 11),
        ("model(a) |", 10),
        ("compare(a)", 0),
        ("nosource(a)", 0),
        ("model(a) | filter()", 11),
        ("model(a) | filter(colour=red)", 18),
        ("model(a) | filter(status=sideways)", 18),
        ("model(a) | tree(root=<p:x>)", 11),
        ("model(a) | tree(root=p:x, predicate=<p:y>)", 22),
        ("model(a) | tree(root=px, predicate=<p:y>)", 16),
        ("model(a) | neighborhood(node=<p:x>, depth=-1)", 36),
        ("model(a) | neighborhood(node=<p:x>, depth=1.5)", 36),
        ('model(a) | filter(subject="unterminated)', 26),
        ("model(a) | filter(subject=<p:x)", 26),
        ("model(a) table()", 9),
        ("model(a) | filter(status=both, status=both)", 11),
    ],
)
def test_syntax_errors(text, offset):
    with pytest.raises(PipelineSyntaxError) as exc:
        parse_pipeline(text)
    assert exc.value.offset == offset


def test_whitespace_insignificant():
    a = parse_pipeline("compare(a,b)|filter(status=only_a)|table()")
    b = parse_pipeline("  compare ( a ,  b )  |  filter ( status = only_a ) | table ( ) ")
    assert a == b


@pytest.mark.parametrize(
    "text, stage, expected, actual",
    [
        ("compare(a,b) | dot()", "dot", "TreeView", "decorated StatementSet"),
        ("model(a) | filter(status=only_a)", "filter", "decorated StatementSet", "StatementSet"),
        ("compare(a,b) | filter(category=added_in_a)", "filter", "3-way StatementSet", "decorated StatementSet"),
        ("model(a) | entities()", "entities", "decorated StatementSet", "StatementSet"),
        ("compare(a,b) | conflicts()", "conflicts", "3-way StatementSet", "decorated StatementSet"),
        ("compare(a,b) | table() | json()", "json", None, "Rendering"),
        ("compare(a,b) | entities() | filter(kind=text)", "filter", "a StatementSet", "EntityChangeSet"),
        ("compare3(n,a,b) | textdiff(predicate=<p:d>)", "textdiff", "decorated StatementSet", "3-way StatementSet"),
        ("model(a) | extent()", "extent", "decorated StatementSet", "StatementSet"),
    ],
)
def test_type_errors(text, stage, expected, actual):
    with pytest.raises(PipelineTypeError) as exc:
        typecheck(parse_pipeline(text))
    assert exc.value.stage_name == stage
    assert exc.value.actual == actual
    if expected:
        assert exc.value.expected == expected


def test_type_ok():
    chain = typecheck(parse_pipeline("compare(a,b) | tree(root=<p:proj>, predicate=<p:hasActivity>) | dot()"))
    assert chain == [VType.DECORATED, VType.TREE, VType.RENDERING]


def test_typecheck_before_data(repo):
    # the model ids do not exist; the type error must win
    with pytest.raises(PipelineTypeError):
        evaluate("compare(x, y) | dot()", repo)


def test_eval_row_counts(repo):
    def rows(text):
        return len(render(evaluate(text, repo)).splitlines()) - 1

    assert rows("compare(a, b) | filter(status=only_a) | table()") == 4
    assert rows("model(anc) | table()") == 8
    assert rows("compare(a, a) | filter(status=only_b) | table()") == 0


def test_eval_unknown_model(repo):
    with pytest.raises(EvalError, match="nope"):
        evaluate("model(nope) | table()", repo)


def test_eval_stage_error_has_index(repo):
    with pytest.raises(EvalError) as exc:
        evaluate("compare(a, b) | filter(status=both) | tree(root=<p:ghost>, predicate=<p:x>)", repo)
    assert exc.value.stage_index == 2


def test_eval_pure(repo):
    text = "compare3(anc, a, b) | conflicts() | json()"
    assert evaluate(text, repo) == evaluate(text, repo)


def test_filter_conjunction(repo):
    chained = evaluate("compare(a, b) | filter(subject=<p:design>) | filter(status=only_a)", repo)
    combined = evaluate("compare(a, b) | filter(subject=<p:design>, status=only_a)", repo)
    assert chained == combined
    assert len(chained.entries) == 2


def test_memory_repository(fix_a, fix_b):
    r = MemoryRepository({"a": fix_a, "b": fix_b})
    value = evaluate("compare(a, b) | filter(status=both)", r)
    assert isinstance(value, ComparisonModel) and len(value.entries) == 7
    assert isinstance(evaluate("model(a) | json()", r), Rendering)


def test_print_parse_goldens():
    for line in (GOLDEN / "pipelines.txt").read_text().splitlines():
        p = parse_pipeline(line.split("\t")[1])
        assert parse_pipeline(format_pipeline(p)) == p


def test_quoted_ids_and_values():
    p = parse_pipeline('model("odd id") | filter(subject=<p:x>)')
    assert p.source.ids == ("odd id",)
    assert parse_pipeline(str(p)) == p
    p = Pipeline(Source("model", ("a",)), (Stage("filter", (Arg("subject", Iri("s")),)),))
    assert str(p) == "model(a) | filter(subject=<s>)"


iris = st.sampled_from(["p:a", "p:b", "http://x/y#z"]).map(Iri)
stage_strategy = st.one_of(
    st.builds(lambda v: Stage("filter", (Arg("status", Keyword(v)),)), st.sampled_from(["only_a", "only_b", "both"])),
    st.builds(lambda v: Stage("filter", (Arg("predicate", v),)), iris),
    st.builds(lambda v: Stage("filter", (Arg("kind", Keyword(v)),)), st.sampled_from(["structural", "text"])),
    st.builds(lambda r, p: Stage("tree", (Arg("root", r), Arg("predicate", p))), iris, iris),
    st.builds(lambda n, d: Stage("neighborhood", (Arg("node", n), Arg("depth", d))), iris, st.integers(0, 5)),
    st.sampled_from([Stage("entities"), Stage("extent"), Stage("table"), Stage("json"), Stage("dot")]),
)
ids = st.one_of(st.sampled_from(["a", "b", "anc", "v1.2"]), st.text(min_size=1, max_size=5).filter(lambda s: "\\" not in s))
sources = st.one_of(
    st.builds(lambda i: Source("model", (i,)), ids),
    st.builds(lambda x, y: Source("compare", (x, y)), ids, ids),
    st.builds(lambda x, y, z: Source("compare3", (x, y, z)), ids, ids, ids),
)


@given(sources, st.lists(stage_strategy, max_size=5))
def test_print_parse_property(source, stages):
    p = Pipeline(source, tuple(stages))
    assert parse_pipeline(format_pipeline(p)) == p


@given(st.frozensets(st.sampled_from(UNIVERSE), max_size=60), st.frozensets(st.sampled_from(UNIVERSE), max_size=60),
       st.sampled_from(["status=only_a", "status=both", "predicate=<r:has>", "subject=<e:1>", "kind=structural"]))
def test_filter_only_removes(a, b, arg):
    r = MemoryRepository({"a": Model("a", a), "b": Model("b", b)})
    before = compare(r.models["a"], r.models["b"]).entries
    after = evaluate(f"compare(a, b) | filter({arg})", r).entries
    assert after.items() <= before.items()
