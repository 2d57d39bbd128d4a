"""Model database: an on-disk repository of named variants, and the delta codec.

Layout::

    <root>/manifest.json      {"variants": [{"id", "file", "parent"}], "schema": path-or-null}
    <root>/models/<id>.nt     canonical serialization of each variant
    <root>/schema.schema      optional schema descriptor

Variants are stored as full snapshots; deltas are only an exchange format.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import DeltaError, ParseDiagnostic, ParseError, RepositoryError
from .ingest import (
    _LineError,
    load_model,
    parse_schema,
    parse_statement,
    serialize_model,
    serialize_schema,
)
from .model import EMPTY_SCHEMA, Model, SchemaDescriptor, Statement, canonical_order

MANIFEST = "manifest.json"
MODELS_DIR = "models"
SCHEMA_FILE = "schema.schema"
DELTA_HEADER = "# procdiff-delta v1"

_ID_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.\-]*$")


def valid_variant_id(id: str) -> bool:
    return bool(_ID_RE.match(id))


@dataclass(frozen=True)
class VariantRecord:
    id: str
    file: str
    parent: str | None = None


@dataclass
class Repository:
    root: Path
    variants: list[VariantRecord] = field(default_factory=list)
    schema_file: str | None = None

    def ids(self) -> list[str]:
        return [v.id for v in self.variants]

    def record(self, id: str) -> VariantRecord:
        for v in self.variants:
            if v.id == id:
                return v
        raise RepositoryError(f"unknown model id {id!r}")

    def __contains__(self, id: object) -> bool:
        return any(v.id == id for v in self.variants)

    def load(self, id: str) -> Model:
        rec = self.record(id)
        path = self.root / rec.file
        if not path.is_file():
            raise RepositoryError(f"variant file missing: {path}")
        return load_model(path, id)

    @property
    def schema(self) -> SchemaDescriptor:
        if self.schema_file is None:
            return EMPTY_SCHEMA
        return parse_schema(
            (self.root / self.schema_file).read_text(encoding="utf-8"),
            source_name=str(self.root / self.schema_file),
        )

    def parent_of(self, id: str) -> str | None:
        return self.record(id).parent


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(repo: Repository) -> None:
    data = {
        "variants": [{"id": v.id, "file": v.file, "parent": v.parent} for v in repo.variants],
        "schema": repo.schema_file,
    }
    _write_atomic(repo.root / MANIFEST, json.dumps(data, indent=2) + "\n")


def _check_forest(variants: list[VariantRecord]) -> None:
    ids = [v.id for v in variants]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise RepositoryError(f"duplicate variant ids in manifest: {', '.join(dupes)}")
    parents = {v.id: v.parent for v in variants}
    for v in variants:
        if v.parent is not None and v.parent not in parents:
            raise RepositoryError(f"variant {v.id!r} names unknown parent {v.parent!r}")
    for start in parents:
        seen = set()
        cur: str | None = start
        while cur is not None:
            if cur in seen:
                raise RepositoryError(f"cycle in parent links through {cur!r}")
            seen.add(cur)
            cur = parents[cur]


def init_repo(path: str | Path, schema: SchemaDescriptor | None = None) -> Repository:
    root = Path(path)
    if (root / MANIFEST).exists():
        raise RepositoryError(f"repository already exists at {root}")
    try:
        (root / MODELS_DIR).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RepositoryError(f"cannot create repository at {root}: {exc}") from exc
    repo = Repository(root)
    if schema is not None:
        _write_atomic(root / SCHEMA_FILE, serialize_schema(schema))
        repo.schema_file = SCHEMA_FILE
    try:
        _write_manifest(repo)
    except OSError as exc:
        raise RepositoryError(f"cannot write manifest in {root}: {exc}") from exc
    return repo


def open_repo(path: str | Path) -> Repository:
    root = Path(path)
    manifest = root / MANIFEST
    if not manifest.is_file():
        raise RepositoryError(f"no repository at {root} (missing {MANIFEST})")
    try:
        data = json.loads(manifest.read_text(encoding="utf-8"))
        variants = [
            VariantRecord(str(v["id"]), str(v["file"]), v.get("parent"))
            for v in data["variants"]
        ]
        schema_file = data.get("schema")
    except (ValueError, KeyError, TypeError) as exc:
        raise RepositoryError(f"corrupt manifest {manifest}: {exc}") from exc
    _check_forest(variants)
    return Repository(root, variants, schema_file)


def add_variant(repo: Repository, model: Model, parent: str | None = None) -> Repository:
    if not valid_variant_id(model.id):
        raise RepositoryError(f"invalid variant id {model.id!r}")
    if model.id in repo:
        raise RepositoryError(f"duplicate variant id {model.id!r}")
    if parent is not None and parent not in repo:
        raise RepositoryError(f"unknown parent {parent!r}")
    rel = f"{MODELS_DIR}/{model.id}.nt"
    _write_atomic(repo.root / rel, serialize_model(model))
    repo.variants.append(VariantRecord(model.id, rel, parent))
    _write_manifest(repo)
    return repo


def set_schema(repo: Repository, schema: SchemaDescriptor) -> Repository:
    _write_atomic(repo.root / SCHEMA_FILE, serialize_schema(schema))
    repo.schema_file = SCHEMA_FILE
    _write_manifest(repo)
    return repo


@dataclass(frozen=True)
class Delta:
    """Statements to remove from ``from_id`` and to add, yielding ``to_id``."""

    from_id: str
    to_id: str
    removed: frozenset[Statement] = frozenset()
    added: frozenset[Statement] = frozenset()

    def __post_init__(self) -> None:
        if self.removed & self.added:
            raise DeltaError("a delta cannot both remove and add the same statement")

    def is_empty(self) -> bool:
        return not self.removed and not self.added


def compute_delta(a: Model, b: Model) -> Delta:
    return Delta(a.id, b.id, a.statements - b.statements, b.statements - a.statements)


def apply_delta(m: Model, d: Delta, *, lenient: bool = False, new_id: str | None = None) -> Model:
    """Return ``(m - removed) | added``.

    In strict mode every removed statement must be present in ``m``; lenient
    mode silently skips missing removals.
    """
    if not lenient:
        missing = d.removed - m.statements
        if missing:
            listing = "; ".join(str(s) for s in canonical_order(missing))
            raise DeltaError(
                f"delta {d.from_id}->{d.to_id} does not apply to {m.id}: "
                f"{len(missing)} removed statement(s) absent: {listing}",
                missing=canonical_order(missing),
            )
    return Model(new_id or d.to_id, (m.statements - d.removed) | d.added)


def invert_delta(d: Delta) -> Delta:
    return Delta(d.to_id, d.from_id, d.added, d.removed)


def serialize_delta(d: Delta) -> str:
    lines = [DELTA_HEADER, f"# from: {d.from_id}", f"# to: {d.to_id}"]
    lines += [f"- {s}" for s in canonical_order(d.removed)]
    lines += [f"+ {s}" for s in canonical_order(d.added)]
    return "\n".join(lines) + "\n"


def parse_delta(source: str, source_name: str = "<delta>") -> Delta:
    lines = source.split("\n")

    def fail(lineno: int, msg: str):
        raise ParseError([ParseDiagnostic(lineno, msg)], source_name)

    if not lines or lines[0].rstrip("\r") != DELTA_HEADER:
        fail(1, f"missing header {DELTA_HEADER!r}")
    from_id = to_id = None
    removed: set[Statement] = set()
    added: set[Statement] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("# from: "):
            from_id = line[len("# from: "):].strip()
        elif line.startswith("# to: "):
            to_id = line[len("# to: "):].strip()
        elif line.startswith("#"):
            continue
        elif line[:2] in ("- ", "+ "):
            try:
                s = parse_statement(line[2:])
            except _LineError as exc:
                fail(lineno, str(exc))
            (removed if line[0] == "-" else added).add(s)
        else:
            fail(lineno, "expected '- <statement>' or '+ <statement>'")
    if from_id is None or to_id is None:
        fail(1, "delta header must name both 'from' and 'to'")
    try:
        return Delta(from_id, to_id, frozenset(removed), frozenset(added))
    except DeltaError as exc:
        fail(1, str(exc))


def write_delta(path: str | Path, d: Delta) -> None:
    Path(path).write_text(serialize_delta(d), encoding="utf-8", newline="\n")


def read_delta(path: str | Path) -> Delta:
    path = Path(path)
    return parse_delta(path.read_text(encoding="utf-8"), source_name=str(path))


def lineage(repo: Repository, id: str) -> Iterable[str]:
    """Yield ``id`` followed by its ancestors, nearest first."""
    cur: str | None = id
    while cur is not None:
        yield cur
        cur = repo.parent_of(cur)
