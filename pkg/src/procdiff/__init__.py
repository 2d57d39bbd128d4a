"""Difference analysis for process models stored as triple graphs."""

from .compare import (
    Category,
    ComparisonModel,
    ConflictReport,
    EntityChange,
    EntityStatus,
    Origin,
    Presence,
    ThreeWayModel,
    changeset_similarity,
    classify3,
    compare,
    conflicts,
    entity_changes,
)
from .errors import ParseError, ProcdiffError
from .ingest import parse_model, parse_schema, serialize_model
from .model import (
    Literal,
    Model,
    Node,
    PredicateKind,
    SchemaDescriptor,
    Statement,
    insert,
    set_op,
    statements_about,
    subjects,
    triple,
)
from .store import Delta, apply_delta, compute_delta, invert_delta

__version__ = "0.1.0"
