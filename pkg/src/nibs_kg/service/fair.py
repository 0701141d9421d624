"""Executable FAIR audit over a store and its publication registry."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..comparison import DOI_PREFIX, PublicationRegistry
from ..errors import KgError
from ..rdf_io import parse_ntriples, serialize
from ..store import Store
from ..terms import OWL_SAME_AS, Iri

_PID = re.compile(r"^10\.\d{4,9}/\S+$")


@dataclass
class Check:
    check: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"check": self.check, "passed": self.passed, "detail": self.detail}


@dataclass
class Principle:
    evidence: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.evidence) and all(c.passed for c in self.evidence)

    def add(self, check: str, passed: bool, detail: str) -> None:
        self.evidence.append(Check(check, bool(passed), detail))

    def to_dict(self) -> dict:
        return {"passed": self.passed, "evidence": [c.to_dict() for c in self.evidence]}


@dataclass
class FairReport:
    findable: Principle
    accessible: Principle
    interoperable: Principle
    reusable: Principle

    def to_dict(self) -> dict:
        return {name: getattr(self, name).to_dict() for name in ("findable", "accessible", "interoperable", "reusable")}

    @property
    def passed(self) -> bool:
        return all(getattr(self, n).passed for n in ("findable", "accessible", "interoperable", "reusable"))

    def summary_lines(self) -> list[str]:
        lines = []
        for name in ("findable", "accessible", "interoperable", "reusable"):
            principle = getattr(self, name)
            lines.append(f"{name}: {'PASS' if principle.passed else 'FAIL'}")
            for c in principle.evidence:
                lines.append(f"  [{'ok' if c.passed else 'fail'}] {c.check}: {c.detail}")
        return lines


def _findable(registry: PublicationRegistry) -> Principle:
    out = Principle()
    records = registry.records()
    if not records:
        out.add("publications", False, "no publications")
        return out
    for rec in records:
        out.add(f"{rec.id} persistent id", bool(_PID.match(rec.id)),
                "pseudo-DOI under " + DOI_PREFIX if rec.id.startswith(DOI_PREFIX) else rec.id)
        meta = rec.metadata
        missing = [name for name in ("title", "creator") if not (getattr(meta, name) or "").strip()]
        out.add(f"{rec.id} metadata", not missing,
                "title and creator present" if not missing else "missing " + ", ".join(missing))
    return out


def _accessible(store: Store, app) -> Principle:
    out = Principle()
    get_routes = [r for r in app.routes if "GET" in (getattr(r, "methods", None) or ())]
    patterns = [r.path_regex for r in get_routes]
    unserved = []
    outside = []
    local = store.entities(external=False)
    for entity in local:
        path = f"/{entity.kind.segment}/{entity.local_id}"
        if not entity.iri.value.startswith(store.namespace + "/"):
            outside.append(entity.local_id)
        if not any(rx.match(path) for rx in patterns):
            unserved.append(entity.local_id)
    out.add("minted IRIs routed", not unserved and not outside,
            f"{len(local) - len(unserved)}/{len(local)} minted IRIs match a GET route under {store.namespace}"
            + (f"; unserved: {unserved[:5]}" if unserved else ""))
    paths = {r.path for r in get_routes}
    out.add("RDF dump endpoint", "/rdf/dump" in paths, "GET /rdf/dump" + (" enabled" if "/rdf/dump" in paths else " missing"))
    out.add("query endpoint", "/sparql" in paths, "GET /sparql" + (" enabled" if "/sparql" in paths else " missing"))
    return out


def _interoperable(store: Store) -> Principle:
    out = Principle()
    try:
        text = serialize(store)
        parsed = parse_ntriples(text)
        ok = len(set(parsed)) == len(text.splitlines())
        out.add("RDF export", ok, f"{len(parsed)} triples exported as N-Triples and re-parsed")
    except KgError as exc:
        out.add("RDF export", False, f"export failed: {exc}")
    links = store.count_matching(None, Iri(OWL_SAME_AS), None)
    out.add("same-as links", links >= 1, f"{links} same-as link(s) to external vocabularies")
    return out


def _reusable(registry: PublicationRegistry) -> Principle:
    out = Principle()
    records = registry.records()
    if not records:
        out.add("publications", False, "no publications")
        return out
    for rec in records:
        lic = (rec.metadata.license or "").strip()
        out.add(f"{rec.id} license", bool(lic), f"license {lic}" if lic else "no license tag")
        out.add(f"{rec.id} timestamp", bool(rec.created_at), f"created {rec.created_at}" if rec.created_at else "no creation timestamp")
    return out


def fair_report(store: Store, registry: PublicationRegistry, app=None) -> FairReport:
    if app is None:
        from .app import ServiceState, create_app

        app = create_app(ServiceState(store, registry))
    with store.lock.read():
        return FairReport(
            findable=_findable(registry),
            accessible=_accessible(store, app),
            interoperable=_interoperable(store),
            reusable=_reusable(registry),
        )
