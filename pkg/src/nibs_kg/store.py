"""In-memory triple store with an entity registry that mints dereferenceable IRIs.

Statements are kept under set semantics and indexed three ways
(subject-first, predicate-first, object-first) so that every pattern with
at least one bound slot avoids a full scan.
"""

from __future__ import annotations

import os
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional
from urllib.parse import quote, unquote

from .errors import (
    DuplicateId,
    InvalidIri,
    InvalidLabel,
    NotFound,
    PredicateNotProperty,
    UnknownEntity,
)
from .terms import (
    OWL_SAME_AS,
    RDF_TYPE,
    RDFS_LABEL,
    RDFS_SUBPROPERTY_OF,
    EntityKind,
    Iri,
    Literal,
    Term,
    is_absolute_iri,
)

DEFAULT_NAMESPACE = "http://localhost:8080"
NAMESPACE_ENV = "NIBS_KG_NAMESPACE"

LOCAL_ID = re.compile(r"^[RPCT][0-9]+$")
_CONTROL = re.compile(r"[\x00-\x1f\x7f-\x9f]")

# Well-known vocabulary registered in every store; these never consume mint counters.
BUILTIN_PROPERTIES = (
    (RDF_TYPE, "type"),
    (RDFS_LABEL, "label"),
    (RDFS_SUBPROPERTY_OF, "sub property of"),
    (OWL_SAME_AS, "same as"),
)
_BUILTIN_IRIS = frozenset(Iri(iri) for iri, _ in BUILTIN_PROPERTIES)


def default_namespace() -> str:
    return os.environ.get(NAMESPACE_ENV, DEFAULT_NAMESPACE)


@dataclass(frozen=True, slots=True)
class Entity:
    iri: Iri
    kind: EntityKind
    label: str
    local_id: str
    external: bool = False


@dataclass(frozen=True, slots=True)
class Statement:
    subject: Iri
    predicate: Iri
    object: Term
    id: int

    @property
    def triple(self) -> tuple[Iri, Iri, Term]:
        return (self.subject, self.predicate, self.object)


@dataclass
class EntityDescription:
    iri: Iri
    local_id: str
    kind: EntityKind
    label: str
    classes: list[Iri]
    statements: list[Statement] = field(default_factory=list)


class RWLock:
    """Many concurrent readers or a single writer.

    The writing thread may re-enter both ``write`` and ``read``.
    """

    def __init__(self):
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer: Optional[int] = None
        self._depth = 0

    @contextmanager
    def read(self):
        me = threading.get_ident()
        if self._writer == me:
            yield
            return
        with self._cond:
            while self._writer is not None:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        me = threading.get_ident()
        with self._cond:
            if self._writer != me:
                while self._writer is not None or self._readers:
                    self._cond.wait()
                self._writer = me
            self._depth += 1
        try:
            yield
        finally:
            with self._cond:
                self._depth -= 1
                if not self._depth:
                    self._writer = None
                    self._cond.notify_all()


def validate_label(label: str) -> str:
    if not isinstance(label, str) or not label.strip():
        raise InvalidLabel("label must be a non-empty string")
    if _CONTROL.search(label):
        raise InvalidLabel(f"label contains control characters: {label!r}")
    return label


class Store:
    def __init__(self, namespace: Optional[str] = None):
        namespace = (namespace or default_namespace()).rstrip("/")
        if not re.match(r"^https?://", namespace) or not is_absolute_iri(namespace):
            raise InvalidIri(f"namespace must be an absolute HTTP(S) IRI: {namespace!r}")
        self.namespace = namespace
        self.lock = RWLock()
        self._entities: dict[Iri, Entity] = {}
        self._local: dict[str, Iri] = {}
        self._by_label: dict[tuple[EntityKind, str], list[Iri]] = {}
        self._counters = {kind: 0 for kind in EntityKind}
        self._next_ordinal = 1
        self._triples: dict[tuple[Iri, Iri, Term], Statement] = {}
        self._spo: dict[Iri, dict[Iri, set]] = {}
        self._pos: dict[Iri, dict[Term, set]] = {}
        self._osp: dict[Term, dict[Iri, set]] = {}
        for iri, label in BUILTIN_PROPERTIES:
            self.register_external(iri, EntityKind.PROPERTY, label)

    # -- identifiers ---------------------------------------------------

    def iri_for(self, kind: EntityKind, local_id: str) -> Iri:
        return Iri(f"{self.namespace}/{kind.segment}/{local_id}")

    @property
    def rdf_type(self) -> Iri:
        return Iri(RDF_TYPE)

    @property
    def label_predicate(self) -> Iri:
        return Iri(RDFS_LABEL)

    def mint_entity(self, kind: EntityKind, label: str, explicit_id: Optional[str] = None) -> Iri:
        validate_label(label)
        with self.lock.write():
            if explicit_id is not None:
                if not LOCAL_ID.match(explicit_id) or explicit_id[0] != kind.prefix:
                    raise InvalidIri(f"explicit id {explicit_id!r} does not match {kind.prefix}<digits>")
                if explicit_id in self._local:
                    raise DuplicateId(f"{explicit_id} is already minted")
                local_id = explicit_id
                number = int(explicit_id[1:])
                self._counters[kind] = max(self._counters[kind], number)
            else:
                self._counters[kind] += 1
                local_id = f"{kind.prefix}{self._counters[kind]}"
                while local_id in self._local:
                    self._counters[kind] += 1
                    local_id = f"{kind.prefix}{self._counters[kind]}"
            iri = self.iri_for(kind, local_id)
            self._register(Entity(iri, kind, label, local_id))
            return iri

    def register_external(self, iri: str | Iri, kind: EntityKind, label: Optional[str] = None) -> Iri:
        """Register an IRI from another namespace; idempotent for the same IRI."""
        iri = iri if isinstance(iri, Iri) else Iri(iri)
        label = validate_label(label if label is not None else iri.value)
        with self.lock.write():
            existing = self._entities.get(iri)
            if existing is not None:
                return iri
            self._register(Entity(iri, kind, label, quote(iri.value, safe=""), external=True))
            return iri

    def _register(self, entity: Entity) -> None:
        self._entities[entity.iri] = entity
        self._local[entity.local_id] = entity.iri
        self._by_label.setdefault((entity.kind, entity.label), []).append(entity.iri)

    # -- registry queries ----------------------------------------------

    def entity(self, iri: Iri) -> Entity:
        with self.lock.read():
            try:
                return self._entities[iri]
            except KeyError:
                raise NotFound(f"{iri} was never minted") from None

    def has_entity(self, iri: Iri) -> bool:
        return iri in self._entities

    def by_local_id(self, local_id: str) -> Optional[Entity]:
        with self.lock.read():
            iri = self._local.get(local_id)
            if iri is None and not LOCAL_ID.match(local_id):
                iri = self._local.get(quote(unquote(local_id), safe=""))
            return self._entities.get(iri) if iri is not None else None

    def find(self, kind: EntityKind, label: str, member_of: Optional[Iri] = None) -> list[Iri]:
        """Entities of ``kind`` with exactly ``label``, optionally restricted to a class."""
        with self.lock.read():
            found = list(self._by_label.get((kind, label), ()))
            if member_of is not None:
                rdf_type = self.rdf_type
                found = [iri for iri in found if (iri, rdf_type, member_of) in self._triples]
            return found

    def entities(self, kind: Optional[EntityKind] = None, *, external: Optional[bool] = None) -> list[Entity]:
        with self.lock.read():
            return [
                e
                for e in self._entities.values()
                if (kind is None or e.kind is kind) and (external is None or e.external == external)
            ]

    def label(self, iri: Iri) -> str:
        return self.entity(iri).label

    @property
    def counters(self) -> dict[EntityKind, int]:
        return dict(self._counters)

    # -- statements ----------------------------------------------------

    def add_statement(self, s: Iri, p: Iri, o: Term) -> int:
        with self.lock.write():
            for node in (s, p):
                if node not in self._entities:
                    raise UnknownEntity(f"{node} is not a registered entity")
            if self._entities[p].kind is not EntityKind.PROPERTY:
                raise PredicateNotProperty(f"{p} is registered as {self._entities[p].kind.value}")
            if not isinstance(o, (Iri, Literal)):
                raise TypeError(f"object must be an Iri or Literal, got {type(o).__name__}")
            triple = (s, p, o)
            existing = self._triples.get(triple)
            if existing is not None:
                return existing.id
            stmt = Statement(s, p, o, self._next_ordinal)
            self._next_ordinal += 1
            self._triples[triple] = stmt
            self._spo.setdefault(s, {}).setdefault(p, set()).add(o)
            self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
            self._osp.setdefault(o, {}).setdefault(s, set()).add(p)
            return stmt.id

    def remove_statement(self, s: Iri, p: Iri, o: Term) -> bool:
        """Drop a triple if present. Its ordinal is never handed out again."""
        with self.lock.write():
            if self._triples.pop((s, p, o), None) is None:
                return False
            _discard(self._spo, s, p, o)
            _discard(self._pos, p, o, s)
            _discard(self._osp, o, s, p)
            return True

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple) -> bool:
        return tuple(triple) in self._triples

    def statements_matching(
        self, s: Optional[Iri] = None, p: Optional[Iri] = None, o: Optional[Term] = None
    ) -> list[Statement]:
        with self.lock.read():
            triples = self._triples
            return sorted((triples[t] for t in self._match(s, p, o)), key=_by_ordinal)

    def count_matching(self, s=None, p=None, o=None) -> int:
        """Number of matches without materializing statements (used by the query planner)."""
        with self.lock.read():
            if s is not None and p is not None and o is not None:
                return int((s, p, o) in self._triples)
            if s is not None and p is not None:
                return len(self._spo.get(s, {}).get(p, ()))
            if p is not None and o is not None:
                return len(self._pos.get(p, {}).get(o, ()))
            if s is not None and o is not None:
                return len(self._osp.get(o, {}).get(s, ()))
            if s is not None:
                return sum(len(v) for v in self._spo.get(s, {}).values())
            if p is not None:
                return sum(len(v) for v in self._pos.get(p, {}).values())
            if o is not None:
                return sum(len(v) for v in self._osp.get(o, {}).values())
            return len(self._triples)

    def _match(self, s, p, o) -> Iterator[tuple]:
        if s is not None and p is not None and o is not None:
            if (s, p, o) in self._triples:
                yield (s, p, o)
        elif s is not None and p is not None:
            for obj in self._spo.get(s, {}).get(p, ()):
                yield (s, p, obj)
        elif p is not None and o is not None:
            for subj in self._pos.get(p, {}).get(o, ()):
                yield (subj, p, o)
        elif s is not None and o is not None:
            for pred in self._osp.get(o, {}).get(s, ()):
                yield (s, pred, o)
        elif s is not None:
            for pred, objs in self._spo.get(s, {}).items():
                for obj in objs:
                    yield (s, pred, obj)
        elif p is not None:
            for obj, subjs in self._pos.get(p, {}).items():
                for subj in subjs:
                    yield (subj, p, obj)
        elif o is not None:
            for subj, preds in self._osp.get(o, {}).items():
                for pred in preds:
                    yield (subj, pred, o)
        else:
            yield from self._triples

    def statements(self) -> list[Statement]:
        with self.lock.read():
            return sorted(self._triples.values(), key=_by_ordinal)

    def triple_set(self) -> set[tuple[Iri, Iri, Term]]:
        with self.lock.read():
            return set(self._triples)

    def export_triples(self) -> list[tuple[Iri, Iri, Term]]:
        """Every stored triple plus one label triple per registered entity.

        Label triples come first (registry order), then statements by ordinal.
        The built-in RDF/OWL properties every store starts with are not labelled,
        so an empty store exports nothing.
        """
        with self.lock.read():
            label = self.label_predicate
            out = [(e.iri, label, Literal(e.label)) for e in self._entities.values() if e.iri not in _BUILTIN_IRIS]
            out.extend(stmt.triple for stmt in sorted(self._triples.values(), key=_by_ordinal))
            return out

    # -- dereferencing -------------------------------------------------

    def classes_of(self, iri: Iri) -> list[Iri]:
        return [st.object for st in self.statements_matching(iri, self.rdf_type) if isinstance(st.object, Iri)]

    def resolve(self, iri: Iri) -> EntityDescription:
        with self.lock.read():
            entity = self.entity(iri)
            return EntityDescription(
                iri=iri,
                local_id=entity.local_id,
                kind=entity.kind,
                label=entity.label,
                classes=self.classes_of(iri),
                statements=self.statements_matching(iri),
            )

    # -- comparison ----------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Store):
            return NotImplemented
        return (
            self.namespace == other.namespace
            and self._entities == other._entities
            and set(self._triples) == set(other._triples)
        )

    __hash__ = None  # mutable

    def __repr__(self) -> str:
        return f"Store({self.namespace!r}, entities={len(self._entities)}, statements={len(self._triples)})"


def _by_ordinal(stmt: Statement) -> int:
    return stmt.id


def _discard(index: dict, a, b, c) -> None:
    inner = index[a]
    inner[b].discard(c)
    if not inner[b]:
        del inner[b]
    if not inner:
        del index[a]


def iter_terms(triples: Iterable[tuple]) -> Iterator[Term]:
    for s, p, o in triples:
        yield s
        yield p
        yield o
