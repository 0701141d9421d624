"""CSV ingestion of study records into per-paper contribution subgraphs.

One CSV row becomes one paper node plus one contribution node. Cells hold
one or more ``;``-separated tokens; tokens that do not resolve against the
vocabulary are stored verbatim as string literals and surface in the
validation report rather than aborting the run.
"""

from __future__ import annotations

import csv
import io
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, TextIO, Union

from .errors import MalformedCsv, MappingError, MissingTitleColumn
from .store import Store
from .terms import EntityKind, Iri, Literal, parse_decimal
from .template import Template, ValidationReport, validate
from .vocabulary import (
    RTMS_PROPERTIES,
    ControlledTerm,
    VocabularyManifest,
    lookup_term,
    normalize,
)

TOKEN_SEPARATOR = ";"
METADATA_KEYS = {"title": "title", "doi": "doi", "year": "year", "author": "author", "first-author": "author"}
_WS = re.compile(r"\s+")


@dataclass
class StudyRecord:
    title: str
    doi: Optional[str] = None
    year: Optional[int] = None
    first_author: Optional[str] = None
    values: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise ValueError("a study record needs a non-empty title")


@dataclass
class Contribution:
    iri: Iri
    paper_iri: Iri
    statement_ordinals: list[int] = field(default_factory=list)


@dataclass
class IngestSummary:
    total: int = 0
    conforming: int = 0
    with_violations: int = 0
    unresolved_tokens: Counter = field(default_factory=Counter)
    contributions: list[Contribution] = field(default_factory=list, repr=False)
    reports: list[ValidationReport] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "conforming": self.conforming,
            "with_violations": self.with_violations,
            "unresolved_tokens": [
                {"property": prop, "token": token, "count": count}
                for (prop, token), count in sorted(self.unresolved_tokens.items())
            ],
        }


# -- CSV ---------------------------------------------------------------


def load_mapping(text: str) -> dict[str, str]:
    """Parse ``column_header = property_label`` lines; ``#`` starts a comment."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MappingError(f"mapping line {lineno}: expected 'column = property label'")
        column, label = (part.strip() for part in line.split("=", 1))
        if not column or not label:
            raise MappingError(f"mapping line {lineno}: empty column or property label")
        mapping[column] = label
    return mapping


def check_mapping(mapping: Mapping[str, str], manifest: VocabularyManifest) -> None:
    for column, label in mapping.items():
        if normalize(label) not in METADATA_KEYS and manifest.property(label) is None:
            raise MappingError(f"column {column!r} maps to unknown property {label!r}")


def parse_csv(source: Union[str, TextIO], mapping: Optional[Mapping[str, str]] = None) -> list[StudyRecord]:
    """Read study records from CSV text.

    ``mapping`` renames columns to property labels; when given, unmapped
    columns are ignored. Without it every header is used as its own key.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    rows = csv.reader(stream)
    header = next(rows, None)
    if header is None:
        raise MissingTitleColumn("input has no header row")
    keys: list[Optional[str]] = []
    for column in header:
        column = column.strip()
        if mapping is not None:
            keys.append(mapping.get(column))
        else:
            keys.append(column or None)
    meta = [METADATA_KEYS.get(normalize(k)) if k else None for k in keys]
    if "title" not in meta:
        raise MissingTitleColumn(f"no column maps to 'title' (header: {header})")

    records = []
    for rowno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedCsv(rowno, f"expected {len(header)} fields, found {len(row)}")
        fields: dict = {"values": {}}
        for key, role, cell in zip(keys, meta, row):
            if key is None or not cell.strip():
                continue
            if role == "title":
                fields["title"] = cell.strip()
            elif role == "year":
                try:
                    fields["year"] = int(cell.strip())
                except ValueError:
                    raise MalformedCsv(rowno, f"year {cell!r} is not an integer") from None
            elif role == "doi":
                fields["doi"] = cell.strip()
            elif role == "author":
                fields["first_author"] = cell.strip()
            else:
                tokens = [t.strip() for t in cell.split(TOKEN_SEPARATOR)]
                tokens = [t for t in tokens if t]
                if tokens:
                    fields["values"].setdefault(key, []).extend(tokens)
        if "title" not in fields:
            raise MalformedCsv(rowno, "empty title")
        records.append(StudyRecord(**fields))
    return records


def record_columns() -> list[str]:
    """Default CSV columns: metadata then every leaf dose property in table order."""
    cols = ["title", "doi", "year", "author"]
    for pdef in RTMS_PROPERTIES:
        if pdef.sub_properties:
            cols.extend(sub.label for sub in pdef.sub_properties)
        else:
            cols.append(pdef.label)
    return cols


def write_csv(records: Iterable[StudyRecord], stream: TextIO, columns: Optional[list[str]] = None) -> None:
    records = list(records)
    columns = columns or record_columns()
    extra = sorted({k for r in records for k in r.values if k not in columns})
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns + extra)
    for r in records:
        meta = {"title": r.title, "doi": r.doi or "", "year": "" if r.year is None else str(r.year),
                "author": r.first_author or ""}
        writer.writerow([meta[c] if c in meta else TOKEN_SEPARATOR.join(r.values.get(c, [])) for c in columns + extra])


# -- materialization ---------------------------------------------------


def _entity_label(text: str) -> str:
    label = _WS.sub(" ", "".join(ch if ch.isprintable() else " " for ch in text)).strip()
    return label or "untitled"


def record_to_contribution(
    store: Store,
    manifest: VocabularyManifest,
    template: Template,
    record: StudyRecord,
    unresolved: Optional[Counter] = None,
) -> tuple[Contribution, ValidationReport]:
    unresolved = unresolved if unresolved is not None else Counter()
    meta = manifest.meta
    ordinals = []
    with store.lock.write():
        add = lambda s, p, o: ordinals.append(store.add_statement(s, p, o))  # noqa: E731
        title_label = _entity_label(record.title)
        paper = store.mint_entity(EntityKind.RESOURCE, title_label)
        add(paper, store.rdf_type, manifest.paper_class)
        add(paper, meta["title"], Literal(record.title))
        if record.doi:
            add(paper, meta["doi"], Literal(record.doi))
        if record.year is not None:
            add(paper, meta["year"], Literal(str(record.year), "integer"))
        if record.first_author:
            add(paper, meta["author"], Literal(record.first_author))

        contrib = store.mint_entity(EntityKind.RESOURCE, f"Contribution: {title_label}")
        add(contrib, store.rdf_type, manifest.contribution_class)
        add(paper, meta["has contribution"], contrib)

        for key, tokens in record.values.items():
            spec = manifest.property(key)
            if spec is None:
                found = store.find(EntityKind.PROPERTY, key)
                prop = found[0] if found else store.mint_entity(EntityKind.PROPERTY, key)
                for token in tokens:
                    add(contrib, prop, Literal(token))
                continue
            for token in tokens:
                if spec.controlled:
                    hit = lookup_term(manifest, spec.iri, token)
                    if isinstance(hit, ControlledTerm):
                        add(contrib, spec.iri, hit.iri)
                        continue
                    unresolved[(spec.label, token)] += 1
                    add(contrib, spec.iri, Literal(token))
                else:
                    value = parse_decimal(token)
                    if value is None:
                        unresolved[(spec.label, token)] += 1
                        add(contrib, spec.iri, Literal(token))
                    else:
                        add(contrib, spec.iri, Literal.decimal(value))

        report = validate(store, contrib, template)
    return Contribution(contrib, paper, ordinals), report


def ingest_corpus(
    store: Store, manifest: VocabularyManifest, template: Template, records: Iterable[StudyRecord]
) -> IngestSummary:
    summary = IngestSummary()
    for record in records:
        contribution, report = record_to_contribution(store, manifest, template, record, summary.unresolved_tokens)
        summary.total += 1
        if report.conforms:
            summary.conforming += 1
        else:
            summary.with_violations += 1
        summary.contributions.append(contribution)
        summary.reports.append(report)
    return summary


def list_contributions(store: Store, manifest: VocabularyManifest) -> list[Iri]:
    """Contribution IRIs in ingestion order."""
    return [st.subject for st in store.statements_matching(None, store.rdf_type, manifest.contribution_class)]


def paper_of(store: Store, manifest: VocabularyManifest, contribution: Iri) -> Optional[Iri]:
    hits = store.statements_matching(None, manifest.meta["has contribution"], contribution)
    return hits[0].subject if hits else None


# -- synthetic corpus --------------------------------------------------

# Sampling ranges for numeric dose fields.
NUMERIC_RANGES = {
    "Intrabust Frequency": (1, 100, 0),  # Hz
    "Amplitude of the Motor Evoked Potential": (0.05, 1.0, 2),  # mV
    "Threshold Ratio": (0.5, 1.5, 2),
    "Percentage or the Amplitude of the Motor Threshold Contraction": (5, 50, 0),  # % of max contraction
    "Percent of Stimulation Intensity": (20, 120, 0),  # % of threshold
    "Maximum Stimulator Output": (20, 100, 0),  # % MSO
    "Coil Size": (25, 150, 0),  # mm
}
FILL_PROBABILITY = 0.85
_SURNAMES = ["Alvarez", "Becker", "Chen", "Dubois", "Eriksen", "Fischer", "Garcia", "Ito", "Kowalski", "Novak"]


def _draw(rng: random.Random, lo: float, hi: float, digits: int) -> str:
    value = round(rng.uniform(lo, hi), digits)
    return Literal.decimal(value).lexical


def generate_synthetic_corpus(seed: int, n: int) -> list[StudyRecord]:
    """Deterministic stand-in corpus whose controlled values all come from the vocabulary.

    Every record carries a type of rTMS; other fields are filled with
    probability ``FILL_PROBABILITY``. Percent min never exceeds percent max.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = random.Random(seed)
    records = []
    for i in range(1, n + 1):
        values: dict[str, list[str]] = {}
        for pdef in RTMS_PROPERTIES:
            if pdef.label != "Type of rTMS" and rng.random() >= FILL_PROBABILITY:
                continue
            if pdef.range == "controlled":
                values[pdef.label] = [rng.choice(pdef.terms)[0]]
            elif pdef.sub_properties:
                lo, hi, digits = NUMERIC_RANGES[pdef.label]
                a, b = sorted(float(_draw(rng, lo, hi, digits)) for _ in range(2))
                low, high = pdef.sub_properties
                values[low.label] = [Literal.decimal(a).lexical]
                values[high.label] = [Literal.decimal(b).lexical]
            else:
                values[pdef.label] = [_draw(rng, *NUMERIC_RANGES[pdef.label])]
        records.append(
            StudyRecord(
                title=f"Synthetic rTMS dose study {i:04d} (seed {seed})",
                doi=f"10.99999/nibs.synthetic.{seed}.{i}",
                year=rng.randint(1999, 2020),
                first_author=rng.choice(_SURNAMES),
                values=values,
            )
        )
    return records
