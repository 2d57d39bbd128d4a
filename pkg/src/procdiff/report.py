"""Display algorithms: hierarchy extraction, DOT rendering, change metrics and text/JSON views.

JSON rendering schema (``render_json``)
---------------------------------------
Every document is an object with ``kind`` (``statements``, ``entities``,
``tree`` or ``metrics``), the variant ids ``a`` and ``b`` (``b`` is null for a
single model) and ``ancestor`` when the value came from a three-way source.

* statements: ``rows`` of ``{subject, predicate, object, object_kind}`` plus
  ``origin`` (two-way) or ``category`` (three-way).
* entities: ``rows`` of ``{entity, status, changed_predicates}``; for conflict
  listings ``status`` is ``conflict`` and each row also carries ``a_removed``,
  ``a_added``, ``b_removed``, ``b_added`` statement counts.
* tree: ``root``, ``predicate``, ``nodes`` of ``{id, label, origin}``,
  ``edges`` of ``{parent, child, origin}`` and ``warnings``.
* metrics: ``rows`` of ``{entity, metric, value}``.
"""

from __future__ import annotations

import graphlib
import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Union

from .compare import (
    Category,
    ComparisonModel,
    ConflictReport,
    EntityChange,
    Origin,
    ThreeWayModel,
    compare,
)
from .errors import ProcdiffError, TreeError
from .model import (
    EMPTY_SCHEMA,
    Literal,
    Model,
    Node,
    SchemaDescriptor,
    Statement,
    canonical_order,
    group_by_subject,
    node_key,
)
from .textdiff import word_extent

StatementValue = Union[Model, ComparisonModel, ThreeWayModel]


def decorations(value: StatementValue | Iterable[Statement]) -> dict[Statement, Origin]:
    """Two-way origins of a statement value; plain models count as ``both``."""
    if isinstance(value, ComparisonModel):
        return value.entries
    if isinstance(value, ThreeWayModel):
        return value.two_way().entries
    return {s: Origin.BOTH for s in value}


def value_ids(value) -> tuple[str | None, str | None, str | None]:
    """(a, b, ancestor) ids carried by a pipeline value."""
    if isinstance(value, Model):
        return value.id, None, None
    if isinstance(value, ComparisonModel):
        return value.a_id, value.b_id, None
    if isinstance(value, ThreeWayModel):
        return value.a_id, value.b_id, value.ancestor_id
    return value.a_id, value.b_id, value.ancestor_id


@dataclass(frozen=True)
class TreeEdge:
    parent: Node
    child: Node
    origin: Origin


@dataclass
class TreeView:
    root: Node
    predicate: Node
    edges: list[TreeEdge]
    node_origins: dict[Node, Origin]
    labels: dict[Node, str]
    warnings: list[str] = field(default_factory=list)
    a_id: str | None = None
    b_id: str | None = None
    ancestor_id: str | None = None

    def nodes(self) -> list[Node]:
        return sorted(self.node_origins, key=node_key)

    def children(self) -> dict[Node, list[Node]]:
        kids: dict[Node, list[Node]] = defaultdict(list)
        for e in self.edges:
            kids[e.parent].append(e.child)
        return kids

    def subtree(self, node: Node) -> set[Node]:
        kids = self.children()
        seen = {node}
        stack = [node]
        while stack:
            for child in kids.get(stack.pop(), ()):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return seen


def _reach(root: Node, start: bool, children: dict[Node, list[tuple[Node, Origin]]], allowed) -> set[Node]:
    if not start:
        return set()
    seen = {root}
    queue = deque([root])
    while queue:
        for child, origin in children.get(queue.popleft(), ()):
            if origin in allowed and child not in seen:
                seen.add(child)
                queue.append(child)
    return seen


def _merge_origins(origins: set[Origin]) -> Origin:
    if Origin.BOTH in origins or {Origin.ONLY_A, Origin.ONLY_B} <= origins:
        return Origin.BOTH
    return next(iter(origins))


def extract_tree(
    statements: StatementValue | Iterable[Statement],
    root: Node,
    predicate: Node,
    schema: SchemaDescriptor = EMPTY_SCHEMA,
) -> TreeView:
    """Breadth-first hierarchy along ``predicate`` starting at ``root``."""
    dec = decorations(statements)
    mentions: set[Origin] = set()
    children: dict[Node, list[tuple[Node, Origin]]] = defaultdict(list)
    for s, origin in dec.items():
        if s.subject == root or s.object == root:
            mentions.add(origin)
        if s.predicate == predicate and isinstance(s.object, Node):
            children[s.subject].append((s.object, origin))
    if not mentions:
        raise TreeError(f"root {root} does not occur in the statement set")
    for kids in children.values():
        kids.sort(key=lambda co: node_key(co[0]))

    visited = {root}
    queue = deque([root])
    edges: list[TreeEdge] = []
    while queue:
        parent = queue.popleft()
        for child, origin in children.get(parent, ()):
            edges.append(TreeEdge(parent, child, origin))
            if child not in visited:
                visited.add(child)
                queue.append(child)

    warnings = []
    graph: dict[Node, set[Node]] = defaultdict(set)
    for e in edges:
        graph[e.child].add(e.parent)
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        cycle = " -> ".join(str(n) for n in exc.args[1])
        warnings.append(f"cycle detected: {cycle}")

    in_a = mentions & {Origin.BOTH, Origin.ONLY_A}
    in_b = mentions & {Origin.BOTH, Origin.ONLY_B}
    reach_a = _reach(root, bool(in_a), children, {Origin.BOTH, Origin.ONLY_A})
    reach_b = _reach(root, bool(in_b), children, {Origin.BOTH, Origin.ONLY_B})
    incident: dict[Node, set[Origin]] = defaultdict(set)
    for e in edges:
        incident[e.parent].add(e.origin)
        incident[e.child].add(e.origin)
    node_origins = {}
    for node in visited:
        touching = incident.get(node, set())
        if Origin.BOTH in touching or (node in reach_a and node in reach_b):
            node_origins[node] = Origin.BOTH
        elif node in reach_a:
            node_origins[node] = Origin.ONLY_A
        elif node in reach_b:
            node_origins[node] = Origin.ONLY_B
        else:
            node_origins[node] = _merge_origins(touching or mentions)

    labels = {}
    name_pred = schema.name_predicate()
    names: dict[Node, set[str]] = defaultdict(set)
    if name_pred is not None:
        for s in dec:
            if s.predicate == name_pred and s.subject in visited and isinstance(s.object, Literal):
                names[s.subject].add(s.object.text)
    for node in visited:
        labels[node] = " / ".join(sorted(names[node])) if names.get(node) else node.iri

    a_id, b_id, anc_id = value_ids(statements) if isinstance(
        statements, (Model, ComparisonModel, ThreeWayModel)
    ) else (None, None, None)
    return TreeView(root, predicate, edges, node_origins, labels, warnings, a_id, b_id, anc_id)


_DOT_STYLE = {Origin.ONLY_A: "dashed", Origin.ONLY_B: "bold"}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def render_dot(t: TreeView, ratios: dict[Node, float] | None = None) -> str:
    """DOT digraph: dashed = first variant only, bold = second variant only."""
    lines = ["digraph comparison {"]
    for node in t.nodes():
        attrs = [f"label={_dot_quote(t.labels.get(node, node.iri))}"]
        style = _DOT_STYLE.get(t.node_origins[node])
        if style:
            attrs.append(f"style={style}")
        if ratios is not None and node in ratios:
            attrs.append(f"tooltip={_dot_quote(f'subtree change ratio {ratios[node]:.4f}')}")
        lines.append(f"  {_dot_quote(node.iri)} [{', '.join(attrs)}];")
    for e in sorted(t.edges, key=lambda e: (node_key(e.parent), node_key(e.child))):
        style = _DOT_STYLE.get(e.origin)
        suffix = f" [style={style}]" if style else ""
        lines.append(f"  {_dot_quote(e.parent.iri)} -> {_dot_quote(e.child.iri)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MetricRow:
    entity: Node
    metric: str
    value: float | int


@dataclass
class MetricTable:
    rows: list[MetricRow] = field(default_factory=list)
    a_id: str | None = None
    b_id: str | None = None
    ancestor_id: str | None = None

    def get(self, entity: Node, metric: str) -> float | int:
        for r in self.rows:
            if r.entity == entity and r.metric == metric:
                return r.value
        raise KeyError((entity, metric))


@dataclass
class EntityChangeSet:
    changes: list[EntityChange] = field(default_factory=list)
    conflicts: ConflictReport | None = None
    a_id: str | None = None
    b_id: str | None = None
    ancestor_id: str | None = None


def _literal_values(statements: Iterable[Statement], predicate: Node) -> dict[Node, list[str]]:
    values: dict[Node, set[str]] = defaultdict(set)
    for s in statements:
        if s.predicate == predicate:
            obj = s.object
            values[s.subject].add(obj.text if isinstance(obj, Literal) else obj.iri)
    return {k: sorted(v) for k, v in values.items()}


def _attribute_extent(va: list[str] | None, vb: list[str] | None) -> float:
    if va is None or vb is None:
        return 1.0
    # multi-valued attributes are compared as one newline-joined text
    return word_extent("\n".join(va), "\n".join(vb))


def text_attribute_rows(
    a: Iterable[Statement], b: Iterable[Statement], predicate: Node, changed_only: bool
) -> list[MetricRow]:
    va, vb = _literal_values(a, predicate), _literal_values(b, predicate)
    rows = []
    for entity in sorted(va.keys() | vb.keys(), key=node_key):
        x, y = va.get(entity), vb.get(entity)
        if changed_only and x == y:
            continue
        rows.append(MetricRow(entity, predicate.iri, _attribute_extent(x, y)))
    return rows


def changed_descriptions(a: Model, b: Model, schema: SchemaDescriptor) -> MetricTable:
    """Text attributes whose value differs, with their word-level extent."""
    rows = []
    for predicate in schema.text_predicates():
        rows.extend(text_attribute_rows(a.statements, b.statements, predicate, changed_only=True))
    rows.sort(key=lambda r: (node_key(r.entity), r.metric.encode()))
    return MetricTable(rows, a.id, b.id)


def _extent_rows(
    entity: Node, sa: set[Statement], sb: set[Statement], schema: SchemaDescriptor
) -> list[MetricRow]:
    if not sa or not sb:
        structural = 1.0 if (sa or sb) else 0.0
    else:
        xa = {s for s in sa if schema.is_structural(s.predicate)}
        xb = {s for s in sb if schema.is_structural(s.predicate)}
        union = xa | xb
        structural = (len(union) - len(xa & xb)) / len(union) if union else 0.0
    extents = []
    for predicate in schema.text_predicates():
        va = _literal_values(sa, predicate).get(entity)
        vb = _literal_values(sb, predicate).get(entity)
        if va is None and vb is None:
            continue
        extents.append(_attribute_extent(va, vb))
    text = sum(extents) / len(extents) if extents else 0.0
    return [MetricRow(entity, "structural", structural), MetricRow(entity, "text", text)]


def entity_extent(
    a: Model | Iterable[Statement],
    b: Model | Iterable[Statement],
    entity: Node,
    schema: SchemaDescriptor = EMPTY_SCHEMA,
) -> list[MetricRow]:
    """Structural (Jaccard distance) and mean text extent of one entity."""
    sa = {s for s in a if s.subject == entity}
    sb = {s for s in b if s.subject == entity}
    if not sa and not sb:
        raise ProcdiffError(f"unknown entity {entity}")
    return _extent_rows(entity, sa, sb, schema)


def all_entity_extents(
    a: Iterable[Statement], b: Iterable[Statement], schema: SchemaDescriptor = EMPTY_SCHEMA
) -> list[MetricRow]:
    ga, gb = group_by_subject(a), group_by_subject(b)
    rows = []
    for entity in sorted(ga.keys() | gb.keys(), key=node_key):
        rows.extend(_extent_rows(entity, ga.get(entity, set()), gb.get(entity, set()), schema))
    return rows


def aggregate_tree_extent(
    t: TreeView,
    a: Model,
    b: Model,
    schema: SchemaDescriptor = EMPTY_SCHEMA,
) -> MetricTable:
    """Per-node subtree change ratios; the root row covers the whole comparison model."""
    entries = {
        s: o for s, o in compare(a, b).entries.items() if not schema.is_ignored(s.predicate)
    }
    total_by_subject: dict[Node, int] = defaultdict(int)
    changed_by_subject: dict[Node, int] = defaultdict(int)
    for s, o in entries.items():
        total_by_subject[s.subject] += 1
        if o is not Origin.BOTH:
            changed_by_subject[s.subject] += 1

    rows = []
    order = [t.root] + [n for n in t.nodes() if n != t.root]
    for node in order:
        if node == t.root:
            changed = sum(changed_by_subject.values())
            total = len(entries)
        else:
            members = t.subtree(node)
            changed = sum(changed_by_subject.get(n, 0) for n in members)
            total = sum(total_by_subject.get(n, 0) for n in members)
        ratio = changed / total if total else 0.0
        rows += [
            MetricRow(node, "changed", changed),
            MetricRow(node, "total", total),
            MetricRow(node, "subtree_change_ratio", ratio),
        ]
    return MetricTable(rows, a.id, b.id)


def subtree_ratios(table: MetricTable) -> dict[Node, float]:
    return {r.entity: r.value for r in table.rows if r.metric == "subtree_change_ratio"}


# -- text tables -------------------------------------------------------------


def format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    out = []
    for row in [header, *rows]:
        out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def format_number(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{value:.4f}"


def _statement_cells(s: Statement) -> list[str]:
    return [str(s.subject), str(s.predicate), str(s.object)]


def _predicates_cell(preds: Iterable[Node]) -> str:
    return ",".join(p.iri for p in sorted(preds, key=node_key)) or "-"


def render_table(value) -> str:
    if isinstance(value, Model):
        rows = [_statement_cells(s) for s in canonical_order(value.statements)]
        return format_table(["subject", "predicate", "object"], rows)
    if isinstance(value, ComparisonModel):
        rows = [
            [value.entries[s].value, *_statement_cells(s)]
            for s in canonical_order(value.entries)
        ]
        return format_table(["origin", "subject", "predicate", "object"], rows)
    if isinstance(value, ThreeWayModel):
        rows = [
            [value.entries[s].category.value, *_statement_cells(s)]
            for s in canonical_order(value.entries)
        ]
        return format_table(["category", "subject", "predicate", "object"], rows)
    if isinstance(value, EntityChangeSet):
        if value.conflicts is not None:
            rows = [
                [
                    str(c.entity),
                    str(len(c.a_changes.removed)),
                    str(len(c.a_changes.added)),
                    str(len(c.b_changes.removed)),
                    str(len(c.b_changes.added)),
                    _predicates_cell(c.predicates),
                ]
                for c in value.conflicts.conflicts
            ]
            return format_table(
                ["entity", "a_removed", "a_added", "b_removed", "b_added", "predicates"], rows
            )
        rows = [
            [str(c.entity), c.status.value, _predicates_cell(c.changed_predicates)]
            for c in value.changes
        ]
        return format_table(["entity", "status", "changed_predicates"], rows)
    if isinstance(value, TreeView):
        return _tree_table(value)
    if isinstance(value, MetricTable):
        rows = [[str(r.entity), r.metric, format_number(r.value)] for r in value.rows]
        return format_table(["entity", "metric", "value"], rows)
    raise TypeError(f"cannot tabulate {type(value).__name__}")


def _tree_table(t: TreeView) -> str:
    """Depth-first outline; nodes reached again (DAG joins, cycles) are marked ``^``."""
    rows = []
    seen: set[Node] = set()

    def walk(node: Node, depth: int, edge_origin: Origin | None) -> None:
        again = node in seen
        seen.add(node)
        mark = " ^" if again else ""
        rows.append([
            t.node_origins[node].value,
            (edge_origin.value if edge_origin else "-"),
            "  " * depth + f"{node}{mark}",
            t.labels.get(node, node.iri),
        ])
        if again:
            return
        for e in sorted(
            (e for e in t.edges if e.parent == node), key=lambda e: node_key(e.child)
        ):
            walk(e.child, depth + 1, e.origin)

    walk(t.root, 0, None)
    return format_table(["node_origin", "edge_origin", "node", "label"], rows)


# -- json --------------------------------------------------------------------


def _statement_json(s: Statement) -> dict:
    obj = s.object
    return {
        "subject": s.subject.iri,
        "predicate": s.predicate.iri,
        "object": obj.iri if isinstance(obj, Node) else obj.text,
        "object_kind": "node" if isinstance(obj, Node) else "literal",
    }


def to_json(value) -> dict:
    a, b, anc = value_ids(value)
    doc: dict = {}
    if isinstance(value, (Model, ComparisonModel, ThreeWayModel)):
        doc["kind"] = "statements"
        rows = []
        for s in canonical_order(value.statements if isinstance(value, Model) else value.entries):
            row = _statement_json(s)
            if isinstance(value, ComparisonModel):
                row["origin"] = value.entries[s].value
            elif isinstance(value, ThreeWayModel):
                row["category"] = value.entries[s].category.value
            rows.append(row)
        payload = {"rows": rows}
    elif isinstance(value, EntityChangeSet):
        doc["kind"] = "entities"
        if value.conflicts is not None:
            rows = [
                {
                    "entity": c.entity.iri,
                    "status": "conflict",
                    "changed_predicates": [p.iri for p in sorted(c.predicates, key=node_key)],
                    "a_removed": len(c.a_changes.removed),
                    "a_added": len(c.a_changes.added),
                    "b_removed": len(c.b_changes.removed),
                    "b_added": len(c.b_changes.added),
                }
                for c in value.conflicts.conflicts
            ]
        else:
            rows = [
                {
                    "entity": c.entity.iri,
                    "status": c.status.value,
                    "changed_predicates": [
                        p.iri for p in sorted(c.changed_predicates, key=node_key)
                    ],
                }
                for c in value.changes
            ]
        payload = {"rows": rows}
    elif isinstance(value, TreeView):
        doc["kind"] = "tree"
        payload = {
            "root": value.root.iri,
            "predicate": value.predicate.iri,
            "nodes": [
                {"id": n.iri, "label": value.labels.get(n, n.iri), "origin": value.node_origins[n].value}
                for n in value.nodes()
            ],
            "edges": [
                {"parent": e.parent.iri, "child": e.child.iri, "origin": e.origin.value}
                for e in sorted(value.edges, key=lambda e: (node_key(e.parent), node_key(e.child)))
            ],
            "warnings": list(value.warnings),
        }
    elif isinstance(value, MetricTable):
        doc["kind"] = "metrics"
        payload = {
            "rows": [{"entity": r.entity.iri, "metric": r.metric, "value": r.value} for r in value.rows]
        }
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")
    doc["a"] = a
    doc["b"] = b
    if anc is not None:
        doc["ancestor"] = anc
    doc.update(payload)
    return doc


def render_json(value) -> str:
    return json.dumps(to_json(value), indent=2, ensure_ascii=False) + "\n"


# -- command summaries ---------------------------------------------------------


def render_comparison_summary(cm: ComparisonModel) -> str:
    counts = cm.counts()
    lines = [f"comparison {cm.a_id} -> {cm.b_id}"]
    lines += [f"  {o.value:<8}{counts[o]}" for o in (Origin.BOTH, Origin.ONLY_A, Origin.ONLY_B)]
    if not cm.has_differences:
        lines.append("models identical")
        return "\n".join(lines) + "\n"
    lines.append("")
    for s in canonical_order(cm.entries):
        origin = cm.entries[s]
        if origin is Origin.ONLY_A:
            lines.append(f"- {s}")
        elif origin is Origin.ONLY_B:
            lines.append(f"+ {s}")
    return "\n".join(lines) + "\n"


def render_threeway_summary(t: ThreeWayModel, report: ConflictReport) -> str:
    counts = t.category_counts()
    lines = [f"three-way comparison {t.a_id}, {t.b_id} against ancestor {t.ancestor_id}"]
    lines += [f"  {c.value:<16}{counts[c]}" for c in Category]
    lines.append(f"conflicts: {len(report.conflicts)}")
    for c in report.conflicts:
        lines.append(
            f"  {c.entity}  {t.a_id}: -{len(c.a_changes.removed)} +{len(c.a_changes.added)}"
            f"  {t.b_id}: -{len(c.b_changes.removed)} +{len(c.b_changes.added)}"
            f"  predicates: {_predicates_cell(c.predicates)}"
        )
    lines.append(f"convergent: {len(report.convergent)}")
    for entity in report.convergent:
        lines.append(f"  {entity}")
    return "\n".join(lines) + "\n"
