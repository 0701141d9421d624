"""Property-aligned comparison tables, chunking, and versioned publication."""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import EmptyTable, InvalidChunkSize, NotFound, UnknownEntity
from .ingest import paper_of
from .store import Store
from .terms import Iri, Literal, Term, minimal_decimal
from .vocabulary import VocabularyManifest, load_manifest

DOI_PREFIX = "10.99999/nibs.cmp."
MODES = ("union", "intersection")


def utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


@dataclass
class ComparisonTable:
    contributions: list[tuple[str, Iri]]
    rows: list[tuple[str, list[list[str]]]]
    id: Optional[str] = None
    version: int = 1
    created_at: str = field(default_factory=utc_now)
    part_index: Optional[tuple[int, int]] = None

    def __len__(self) -> int:
        return len(self.contributions)

    def content(self) -> dict:
        """Everything that identifies the table's substance (no id, version or timestamp)."""
        return {
            "contributions": [[title, iri.value] for title, iri in self.contributions],
            "rows": [[label, [list(c) for c in cells]] for label, cells in self.rows],
            "part_index": list(self.part_index) if self.part_index else None,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.content(), ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "created_at": self.created_at,
            "part_index": list(self.part_index) if self.part_index else None,
            "contributions": [{"title": t, "iri": i.value} for t, i in self.contributions],
            "rows": [{"property": label, "cells": [list(c) for c in cells]} for label, cells in self.rows],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComparisonTable":
        return cls(
            contributions=[(c["title"], Iri(c["iri"])) for c in data["contributions"]],
            rows=[(r["property"], [list(c) for c in r["cells"]]) for r in data["rows"]],
            id=data.get("id"),
            version=data.get("version", 1),
            created_at=data["created_at"],
            part_index=tuple(data["part_index"]) if data.get("part_index") else None,
        )


def render_value(store: Store, term: Term) -> str:
    if isinstance(term, Iri):
        return store.label(term) if store.has_entity(term) else term.value
    if term.is_numeric:
        return minimal_decimal(term.numeric_value())
    return term.lexical


def _title(store: Store, manifest: VocabularyManifest, contribution: Iri) -> str:
    paper = paper_of(store, manifest, contribution)
    if paper is not None:
        titles = store.statements_matching(paper, manifest.meta["title"])
        if titles and isinstance(titles[0].object, Literal):
            return titles[0].object.lexical
        return store.label(paper)
    return store.label(contribution)


def build_comparison(
    store: Store,
    contributions: Sequence[Iri],
    property_mode: str = "union",
    manifest: Optional[VocabularyManifest] = None,
) -> ComparisonTable:
    if property_mode not in MODES:
        raise ValueError(f"property_mode must be one of {MODES}")
    with store.lock.read():
        for iri in contributions:
            if not store.has_entity(iri):
                raise UnknownEntity(f"{iri} is not a registered entity")
        manifest = manifest or load_manifest(store)
        values: list[dict[Iri, list[str]]] = []
        for iri in contributions:
            per_prop: dict[Iri, list[str]] = {}
            for st in store.statements_matching(iri):
                if st.predicate == store.rdf_type:
                    continue
                per_prop.setdefault(st.predicate, []).append(render_value(store, st.object))
            values.append(per_prop)

        if not values:
            used: set[Iri] = set()
        elif property_mode == "union":
            used = set().union(*values)
        else:
            used = set(values[0]).intersection(*values[1:])

        template_order = [spec.iri for spec in manifest.all_properties()]
        ordered = [p for p in template_order if p in used]
        ordered += sorted(used - set(template_order), key=lambda p: (store.label(p), p.value))

        rows = [
            (store.label(prop), [sorted(v.get(prop, [])) for v in values])
            for prop in ordered
        ]
        header = [(_title(store, manifest, iri), iri) for iri in contributions]
    return ComparisonTable(contributions=header, rows=rows)


def chunk_comparisons(
    store: Store,
    contributions: Sequence[Iri],
    chunk_size: int = 100,
    property_mode: str = "union",
    manifest: Optional[VocabularyManifest] = None,
) -> list[ComparisonTable]:
    if not isinstance(chunk_size, int) or chunk_size < 1:
        raise InvalidChunkSize(f"chunk size must be a positive integer, got {chunk_size!r}")
    contributions = list(contributions)
    n_parts = math.ceil(len(contributions) / chunk_size)
    manifest = manifest or (load_manifest(store) if contributions else None)
    tables = []
    for k in range(n_parts):
        part = contributions[k * chunk_size : (k + 1) * chunk_size]
        table = build_comparison(store, part, property_mode, manifest)
        table.part_index = (k + 1, n_parts)
        tables.append(table)
    return tables


# -- export ------------------------------------------------------------


def _cell(values: list[str]) -> str:
    return "; ".join(values)


def export_comparison(table: ComparisonTable, format: str = "csv") -> str:
    if format == "json":
        return json.dumps(table.to_dict(), ensure_ascii=False, indent=2) + "\n"
    header = ["property"] + [title for title, _ in table.contributions]
    body = [[label] + [_cell(c) for c in cells] for label, cells in table.rows]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()
    if format in ("markdown", "md"):
        def esc(text: str) -> str:
            return text.replace("\\", "\\\\").replace("|", "\\|").replace("\r", " ").replace("\n", " ")

        lines = ["| " + " | ".join(esc(h) for h in header) + " |", "|" + " --- |" * len(header)]
        lines += ["| " + " | ".join(esc(c) for c in row) + " |" for row in body]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {format!r}")


# -- publication -------------------------------------------------------


@dataclass(frozen=True)
class PublicationMetadata:
    title: str
    creator: str
    license: Optional[str] = None
    description: str = ""

    def to_dict(self) -> dict:
        return {"title": self.title, "description": self.description, "creator": self.creator, "license": self.license}


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    version: int
    predecessor: Optional[str]
    metadata: PublicationMetadata
    snapshot: ComparisonTable
    created_at: str
    fingerprint: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "predecessor": self.predecessor,
            "created_at": self.created_at,
            "fingerprint": self.fingerprint,
            "metadata": self.metadata.to_dict(),
            "snapshot": self.snapshot.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PublicationRecord":
        meta = data["metadata"]
        return cls(
            id=data["id"],
            version=data["version"],
            predecessor=data.get("predecessor"),
            metadata=PublicationMetadata(meta["title"], meta["creator"], meta.get("license"), meta.get("description", "")),
            snapshot=ComparisonTable.from_dict(data["snapshot"]),
            created_at=data["created_at"],
            fingerprint=data["fingerprint"],
        )


class PublicationRegistry:
    """Pseudo-DOI registry of published comparison snapshots, optionally file-backed."""

    def __init__(self, path: Union[str, Path, None] = None):
        self.path = Path(path) if path is not None else None
        self._records: list[PublicationRecord] = []
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8") or "[]")
            self._records = [PublicationRecord.from_dict(d) for d in data]

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(list(self._records))

    def records(self) -> list[PublicationRecord]:
        return list(self._records)

    def get(self, pid: str) -> PublicationRecord:
        for rec in self._records:
            if rec.id == pid:
                return rec
        raise NotFound(f"no publication {pid!r}")

    def _next_id(self) -> str:
        used = [int(r.id[len(DOI_PREFIX):]) for r in self._records if r.id.startswith(DOI_PREFIX)]
        return f"{DOI_PREFIX}{max(used, default=0) + 1}"

    def to_json(self) -> str:
        return json.dumps([r.to_dict() for r in self._records], ensure_ascii=False, indent=2) + "\n"

    def save(self) -> None:
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(self.to_json(), encoding="utf-8")

    def publish(self, table: ComparisonTable, metadata: PublicationMetadata,
                predecessor: Optional[str] = None) -> PublicationRecord:
        if not table.contributions:
            raise EmptyTable("cannot publish a comparison without contributions")
        fp = table.fingerprint()
        with self._lock:
            for rec in self._records:
                if rec.fingerprint == fp:
                    return rec
            version = 1
            if predecessor is not None:
                version = self.get(predecessor).version + 1
            pid = self._next_id()
            snapshot = copy.deepcopy(table)
            snapshot.id, snapshot.version = pid, version
            record = PublicationRecord(pid, version, predecessor, metadata, snapshot, utc_now(), fp)
            self._records.append(record)
            self.save()
            return record


def publish_comparison(registry: PublicationRegistry, table: ComparisonTable, metadata: PublicationMetadata,
                       predecessor: Optional[str] = None) -> PublicationRecord:
    return registry.publish(table, metadata, predecessor)
