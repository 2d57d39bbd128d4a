"""Comparison engine: two-way comparison models, three-way classification, entity rollups."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple

from .model import Model, Node, Statement, group_by_subject, node_key
from .store import Delta


class Origin(str, Enum):
    ONLY_A = "only_a"
    ONLY_B = "only_b"
    BOTH = "both"

    def swapped(self) -> Origin:
        if self is Origin.ONLY_A:
            return Origin.ONLY_B
        if self is Origin.ONLY_B:
            return Origin.ONLY_A
        return self


class Category(str, Enum):
    UNCHANGED = "unchanged"
    REMOVED_IN_A = "removed_in_a"
    REMOVED_IN_B = "removed_in_b"
    REMOVED_IN_BOTH = "removed_in_both"
    ADDED_IN_A = "added_in_a"
    ADDED_IN_B = "added_in_b"
    ADDED_IN_BOTH = "added_in_both"


class Presence(NamedTuple):
    in_ancestor: bool
    in_a: bool
    in_b: bool

    @property
    def category(self) -> Category:
        return _CATEGORY[self]

    @property
    def origin(self) -> Origin | None:
        """Two-way origin obtained by ignoring the ancestor; None if in neither variant."""
        if self.in_a and self.in_b:
            return Origin.BOTH
        if self.in_a:
            return Origin.ONLY_A
        if self.in_b:
            return Origin.ONLY_B
        return None


_CATEGORY = {
    Presence(True, True, True): Category.UNCHANGED,
    Presence(True, False, True): Category.REMOVED_IN_A,
    Presence(True, True, False): Category.REMOVED_IN_B,
    Presence(True, False, False): Category.REMOVED_IN_BOTH,
    Presence(False, True, False): Category.ADDED_IN_A,
    Presence(False, False, True): Category.ADDED_IN_B,
    Presence(False, True, True): Category.ADDED_IN_BOTH,
}


@dataclass(frozen=True)
class ComparisonModel:
    """Union of two variants, each statement decorated with its origin."""

    a_id: str
    b_id: str
    entries: dict[Statement, Origin]

    def select(self, origin: Origin) -> frozenset[Statement]:
        return frozenset(s for s, o in self.entries.items() if o is origin)

    def side_a(self) -> frozenset[Statement]:
        return frozenset(s for s, o in self.entries.items() if o is not Origin.ONLY_B)

    def side_b(self) -> frozenset[Statement]:
        return frozenset(s for s, o in self.entries.items() if o is not Origin.ONLY_A)

    def counts(self) -> dict[Origin, int]:
        c = Counter(self.entries.values())
        return {o: c.get(o, 0) for o in Origin}

    @property
    def has_differences(self) -> bool:
        return any(o is not Origin.BOTH for o in self.entries.values())

    def swapped(self) -> ComparisonModel:
        return ComparisonModel(
            self.b_id, self.a_id, {s: o.swapped() for s, o in self.entries.items()}
        )


@dataclass(frozen=True)
class ThreeWayModel:
    ancestor_id: str
    a_id: str
    b_id: str
    entries: dict[Statement, Presence]

    def project(self, which: str) -> frozenset[Statement]:
        """Reconstruct one input: ``which`` is ``ancestor``, ``a`` or ``b``."""
        idx = {"ancestor": 0, "a": 1, "b": 2}[which]
        return frozenset(s for s, p in self.entries.items() if p[idx])

    def by_category(self, category: Category) -> frozenset[Statement]:
        return frozenset(s for s, p in self.entries.items() if p.category is category)

    def category_counts(self) -> dict[Category, int]:
        c = Counter(p.category for p in self.entries.values())
        return {cat: c.get(cat, 0) for cat in Category}

    def two_way(self) -> ComparisonModel:
        entries = {}
        for s, p in self.entries.items():
            origin = p.origin
            if origin is not None:
                entries[s] = origin
        return ComparisonModel(self.a_id, self.b_id, entries)


def compare(a: Model, b: Model) -> ComparisonModel:
    sa, sb = a.statements, b.statements
    entries: dict[Statement, Origin] = {}
    for s in sa:
        entries[s] = Origin.BOTH if s in sb else Origin.ONLY_A
    for s in sb - sa:
        entries[s] = Origin.ONLY_B
    return ComparisonModel(a.id, b.id, entries)


def classify3(ancestor: Model, a: Model, b: Model) -> ThreeWayModel:
    sn, sa, sb = ancestor.statements, a.statements, b.statements
    entries = {s: Presence(s in sn, s in sa, s in sb) for s in sn | sa | sb}
    return ThreeWayModel(ancestor.id, a.id, b.id, entries)


class EntityStatus(str, Enum):
    ADDED = "added"
    REMOVED = "removed"
    MODIFIED = "modified"
    UNCHANGED = "unchanged"


@dataclass(frozen=True)
class EntityChange:
    entity: Node
    status: EntityStatus
    changed_predicates: frozenset[Node] = frozenset()


def entity_changes(
    a: Model | Iterable[Statement], b: Model | Iterable[Statement]
) -> list[EntityChange]:
    """One rollup per subject of A or B, in canonical entity order."""
    ga, gb = group_by_subject(a), group_by_subject(b)
    result = []
    for entity in sorted(ga.keys() | gb.keys(), key=node_key):
        ea, eb = ga.get(entity, set()), gb.get(entity, set())
        changed = frozenset(s.predicate for s in ea ^ eb)
        if not ea:
            status = EntityStatus.ADDED
        elif not eb:
            status = EntityStatus.REMOVED
        elif changed:
            status = EntityStatus.MODIFIED
        else:
            status = EntityStatus.UNCHANGED
        result.append(EntityChange(entity, status, changed))
    return result


class EntityDelta(NamedTuple):
    removed: frozenset[Statement]
    added: frozenset[Statement]

    def __bool__(self) -> bool:
        return bool(self.removed or self.added)

    @property
    def size(self) -> int:
        return len(self.removed) + len(self.added)


@dataclass(frozen=True)
class Conflict:
    entity: Node
    a_changes: EntityDelta
    b_changes: EntityDelta

    @property
    def predicates(self) -> frozenset[Node]:
        touched = (
            self.a_changes.removed | self.a_changes.added | self.b_changes.removed | self.b_changes.added
        )
        return frozenset(s.predicate for s in touched)


@dataclass(frozen=True)
class ConflictReport:
    conflicts: list[Conflict] = field(default_factory=list)
    convergent: list[Node] = field(default_factory=list)

    def conflict_entities(self) -> frozenset[Node]:
        return frozenset(c.entity for c in self.conflicts)


def conflicts(t: ThreeWayModel) -> ConflictReport:
    """Entities changed relative to the ancestor in both variants.

    Identical per-entity changes are convergent; anything else is a conflict,
    even when the two sides touch different predicates of the entity.
    """
    per_entity: dict[Node, list[set[Statement]]] = defaultdict(lambda: [set(), set(), set(), set()])
    for s, (n, ina, inb) in t.entries.items():
        if n == ina and n == inb:
            continue
        buckets = per_entity[s.subject]
        if n and not ina:
            buckets[0].add(s)
        elif ina and not n:
            buckets[1].add(s)
        if n and not inb:
            buckets[2].add(s)
        elif inb and not n:
            buckets[3].add(s)
    found, convergent = [], []
    for entity in sorted(per_entity, key=node_key):
        ra, aa, rb, ab = per_entity[entity]
        da = EntityDelta(frozenset(ra), frozenset(aa))
        db = EntityDelta(frozenset(rb), frozenset(ab))
        if not da or not db:
            continue
        if da == db:
            convergent.append(entity)
        else:
            found.append(Conflict(entity, da, db))
    return ConflictReport(found, convergent)


def changeset_similarity(d1: Delta, d2: Delta) -> Fraction:
    """Jaccard similarity of the two deltas' statement footprints (1 when both are empty)."""
    f1 = d1.removed | d1.added
    f2 = d2.removed | d2.added
    union = f1 | f2
    if not union:
        return Fraction(1)
    return Fraction(len(f1 & f2), len(union))
