"""``procdiff`` command-line driver.

Exit status: 0 success / no differences, 1 differences found, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .compare import classify3, compare, conflicts
from .errors import ProcdiffError
from .ingest import load_model, load_schema
from .model import Node
from .query import evaluate, parse_pipeline, render
from .report import (
    MetricTable,
    aggregate_tree_extent,
    all_entity_extents,
    changed_descriptions,
    extract_tree,
    render_comparison_summary,
    render_dot,
    render_json,
    render_table,
    render_threeway_summary,
    subtree_ratios,
)
from .store import (
    add_variant,
    apply_delta,
    compute_delta,
    init_repo,
    open_repo,
    read_delta,
    write_delta,
)

OK, DIFFERENT, ERROR = 0, 1, 2
DEFAULT_REPO = ".procdiff"


def _tree_spec(text: str) -> tuple[Node, Node]:
    parts = [p.strip().strip("<>") for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError("expected <root>,<predicate>")
    try:
        return Node(parts[0]), Node(parts[1])
    except ProcdiffError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procdiff", description="Difference analysis for process models stored as triples."
    )
    parser.add_argument(
        "--repo",
        default=None,
        help=f"repository directory (default: $PROCDIFF_REPO or ./{DEFAULT_REPO})",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("init", help="create an empty repository")
    p.add_argument("--schema", type=Path, help="schema descriptor file to store with the repository")

    p = sub.add_parser("import", help="import an N-Triples model as a new variant")
    p.add_argument("file", type=Path)
    p.add_argument("--as", dest="id", required=True)
    p.add_argument("--parent")

    p = sub.add_parser("diff", help="compare two variants")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--ancestor")
    p.add_argument("--format", choices=["text", "json", "dot"], default="text")
    p.add_argument("--tree", type=_tree_spec, metavar="ROOT,PREDICATE")

    p = sub.add_parser("query", help="evaluate a pipeline")
    p.add_argument("pipeline")

    p = sub.add_parser("delta", help="write the delta from A to B")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("-o", "--output", type=Path, required=True)

    p = sub.add_parser("apply", help="apply a delta file to a variant, storing the result")
    p.add_argument("base")
    p.add_argument("file", type=Path)
    p.add_argument("--as", dest="id", required=True)
    p.add_argument("--lenient", action="store_true")

    p = sub.add_parser("metrics", help="change-extent metrics for two variants")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--ancestor")
    p.add_argument("--tree", type=_tree_spec, metavar="ROOT,PREDICATE")

    p = sub.add_parser("descriptions", help="list changed text attributes")
    p.add_argument("a")
    p.add_argument("b")
    return parser


def _repo_path(args) -> Path:
    return Path(args.repo or os.environ.get("PROCDIFF_REPO") or DEFAULT_REPO)


def _cmd_init(args, out: TextIO) -> int:
    schema = load_schema(args.schema) if args.schema else None
    repo = init_repo(_repo_path(args), schema)
    out.write(f"initialized repository at {repo.root}\n")
    return OK


def _cmd_import(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    model = load_model(args.file, args.id)
    add_variant(repo, model, args.parent)
    out.write(f"imported {args.id} ({len(model)} statements)\n")
    return OK


def _cmd_diff(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    a, b = repo.load(args.a), repo.load(args.b)
    cm = compare(a, b)
    status = DIFFERENT if cm.has_differences else OK
    if args.format == "dot" or (args.tree and args.format != "text"):
        if not args.tree:
            raise ProcdiffError("--format dot requires --tree ROOT,PREDICATE")
        source = classify3(repo.load(args.ancestor), a, b) if args.ancestor else cm
        tree = extract_tree(source, *args.tree, repo.schema)
        if args.format == "dot":
            ratios = subtree_ratios(aggregate_tree_extent(tree, a, b, repo.schema))
            out.write(render_dot(tree, ratios))
        else:
            out.write(render_json(tree))
        return status
    if args.ancestor:
        t = classify3(repo.load(args.ancestor), a, b)
        if args.format == "json":
            out.write(render_json(t))
        else:
            out.write(render_comparison_summary(cm))
            out.write(render_threeway_summary(t, conflicts(t)))
        return status
    if args.format == "json":
        out.write(render_json(cm))
    else:
        out.write(render_comparison_summary(cm))
        if args.tree:
            out.write(render_table(extract_tree(cm, *args.tree, repo.schema)))
    return status


def _cmd_query(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    out.write(render(evaluate(parse_pipeline(args.pipeline), repo)))
    return OK


def _cmd_delta(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    d = compute_delta(repo.load(args.a), repo.load(args.b))
    write_delta(args.output, d)
    out.write(f"wrote {args.output}: -{len(d.removed)} +{len(d.added)}\n")
    return OK


def _cmd_apply(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    base = repo.load(args.base)
    model = apply_delta(base, read_delta(args.file), lenient=args.lenient, new_id=args.id)
    add_variant(repo, model, args.base)
    out.write(f"stored {args.id} ({len(model)} statements, parent {args.base})\n")
    return OK


def _cmd_metrics(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    schema = repo.schema
    a, b = repo.load(args.a), repo.load(args.b)
    cm = compare(a, b)
    out.write(render_table(MetricTable(all_entity_extents(a, b, schema), a.id, b.id)))
    descriptions = changed_descriptions(a, b, schema)
    if descriptions.rows:
        out.write("\n")
        out.write(render_table(descriptions))
    if args.tree:
        tree = extract_tree(cm, *args.tree, schema)
        out.write("\n")
        out.write(render_table(aggregate_tree_extent(tree, a, b, schema)))
    if args.ancestor:
        t = classify3(repo.load(args.ancestor), a, b)
        out.write("\n")
        out.write(render_threeway_summary(t, conflicts(t)))
    return DIFFERENT if cm.has_differences else OK


def _cmd_descriptions(args, out: TextIO) -> int:
    repo = open_repo(_repo_path(args))
    a, b = repo.load(args.a), repo.load(args.b)
    table = changed_descriptions(a, b, repo.schema)
    out.write(render_table(table))
    return DIFFERENT if compare(a, b).has_differences else OK


_COMMANDS = {
    "init": _cmd_init,
    "import": _cmd_import,
    "diff": _cmd_diff,
    "query": _cmd_query,
    "delta": _cmd_delta,
    "apply": _cmd_apply,
    "metrics": _cmd_metrics,
    "descriptions": _cmd_descriptions,
}


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    try:
        return _COMMANDS[args.command](args, out)
    except ProcdiffError as exc:
        err.write(f"procdiff: error: {exc}\n")
        return ERROR
    except OSError as exc:
        err.write(f"procdiff: error: {exc}\n")
        return ERROR


def main() -> None:
    sys.exit(run())
