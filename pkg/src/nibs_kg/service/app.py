"""HTTP facade: dereferencing with content negotiation, RDF dump, queries, FAIR audit.

The service never writes. It serves one immutable snapshot at a time;
``ServiceState.reload`` swaps in a fresh snapshot read from disk.
"""

from __future__ import annotations

import logging
import socket
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import uvicorn
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from ..comparison import PublicationRegistry
from ..errors import BindFailure, NotFound, QuerySyntaxError, TypeMismatch, UnboundVariable, UnknownPrefix
from ..query import execute, parse_query, result_to_dict
from ..query.results import term_to_json
from ..rdf_io import read_snapshot, serialize, serialize_triples
from ..store import Entity, Store
from ..terms import EntityKind, Iri
from .fair import fair_report
from .schemas import EntityModel, FairReportModel, QueryResultModel

log = logging.getLogger(__name__)

NTRIPLES = "application/n-triples"
JSON = "application/json"


@dataclass(frozen=True)
class Snapshot:
    store: Store
    registry: PublicationRegistry


class ServiceState:
    """Holds the current snapshot; swapping it is a single reference assignment."""

    def __init__(self, store: Store, registry: Optional[PublicationRegistry] = None,
                 store_base: Union[str, Path, None] = None, registry_path: Union[str, Path, None] = None):
        self._snapshot = Snapshot(store, registry or PublicationRegistry())
        self.store_base = store_base
        self.registry_path = registry_path
        self._dump: Optional[tuple[Snapshot, str]] = None
        self._dump_lock = threading.Lock()

    @classmethod
    def from_paths(cls, store_base: Union[str, Path], registry_path: Union[str, Path, None] = None) -> "ServiceState":
        store = read_snapshot(store_base)
        registry = PublicationRegistry(registry_path)
        return cls(store, registry, store_base, registry_path)

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def reload(self) -> None:
        if self.store_base is None:
            raise RuntimeError("state was not created from files; nothing to reload")
        fresh = Snapshot(read_snapshot(self.store_base), PublicationRegistry(self.registry_path))
        self._snapshot = fresh

    def dump(self, snap: Snapshot) -> str:
        with self._dump_lock:
            if self._dump is None or self._dump[0] is not snap:
                self._dump = (snap, serialize(snap.store))
            return self._dump[1]


def negotiate(accept: Optional[str]) -> Optional[str]:
    """Pick ``nt`` or ``json`` from an Accept header; None means 406."""
    if accept is None or not accept.strip():
        return "json"
    for part in accept.split(","):
        media = part.split(";", 1)[0].strip().lower()
        if media == NTRIPLES:
            return "nt"
        if media in (JSON, "*/*"):
            return "json"
    return None


def _not_acceptable() -> Response:
    return PlainTextResponse(f"supported representations: {JSON}, {NTRIPLES}", status_code=406)


def _ntriples(text: str) -> Response:
    return Response(text, media_type=f"{NTRIPLES}; charset=utf-8")


def describe(store: Store, entity: Entity) -> dict:
    desc = store.resolve(entity.iri)
    statements = []
    for st in desc.statements:
        obj = term_to_json(st.object)
        if isinstance(st.object, Iri) and store.has_entity(st.object):
            obj["label"] = store.label(st.object)
        statements.append({
            "ordinal": st.id,
            "subject": st.subject.value,
            "predicate": st.predicate.value,
            "predicate_label": store.label(st.predicate),
            "object": obj,
        })
    return {
        "id": entity.local_id,
        "iri": entity.iri.value,
        "kind": entity.kind.value,
        "label": entity.label,
        "classes": [c.value for c in desc.classes],
        "statements": statements,
        "links": {"self": entity.iri.value, "ntriples": entity.iri.value},
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="nibs-kg", description="Dereferenceable rTMS dose knowledge graph")
    app.state.kg = state

    def entity_route(kind: EntityKind):
        def handler(local_id: str, request: Request):
            snap = state.snapshot
            entity = snap.store.by_local_id(local_id)
            if entity is None or entity.kind is not kind:
                return JSONResponse({"detail": f"no {kind.value.lower()} {local_id!r}"}, status_code=404)
            fmt = negotiate(request.headers.get("accept"))
            if fmt is None:
                return _not_acceptable()
            if fmt == "nt":
                return _ntriples(serialize_triples(st.triple for st in snap.store.statements_matching(entity.iri)))
            return JSONResponse(EntityModel(**describe(snap.store, entity)).model_dump(exclude_none=True))

        handler.__name__ = f"get_{kind.segment}"
        return handler

    for kind in EntityKind:
        app.add_api_route(f"/{kind.segment}/{{local_id:path}}", entity_route(kind), methods=["GET"],
                          response_model=EntityModel, summary=f"Dereference a {kind.value.lower()}")

    @app.get("/comparison/{pid:path}")
    def get_comparison(pid: str, request: Request):
        snap = state.snapshot
        try:
            record = snap.registry.get(pid)
        except NotFound:
            return JSONResponse({"detail": f"no comparison {pid!r}"}, status_code=404)
        fmt = negotiate(request.headers.get("accept"))
        if fmt is None:
            return _not_acceptable()
        if fmt == "nt":
            triples = []
            for _, iri in record.snapshot.contributions:
                triples.extend(st.triple for st in snap.store.statements_matching(iri))
            return _ntriples(serialize_triples(triples))
        return JSONResponse(record.to_dict())

    @app.get("/rdf/dump")
    def rdf_dump():
        snap = state.snapshot
        return _ntriples(state.dump(snap))

    @app.get("/sparql", response_model=QueryResultModel)
    def sparql(query: str = Query(..., description="SELECT query text")):
        snap = state.snapshot
        try:
            result = execute(snap.store, parse_query(query))
        except (QuerySyntaxError, UnknownPrefix, UnboundVariable, TypeMismatch) as exc:
            return JSONResponse({"detail": f"{type(exc).__name__}: {exc}"}, status_code=400)
        return JSONResponse(result_to_dict(result))

    @app.get("/fair/report", response_model=FairReportModel)
    def get_fair_report():
        snap = state.snapshot
        return JSONResponse(fair_report(snap.store, snap.registry, app).to_dict())

    @app.get("/")
    def index():
        snap = state.snapshot
        return {
            "namespace": snap.store.namespace,
            "entities": len(snap.store.entities()),
            "statements": len(snap.store),
            "publications": len(snap.registry),
            "endpoints": ["/resource/{id}", "/property/{id}", "/class/{id}", "/template/{id}",
                          "/comparison/{id}", "/rdf/dump", "/sparql?query=", "/fair/report"],
        }

    return app


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"address must look like HOST:PORT, got {addr!r}")
    return host.strip("[]"), int(port)


class ServiceHandle:
    def __init__(self, server: uvicorn.Server, thread: threading.Thread, host: str, port: int):
        self.server, self.thread, self.host, self.port = server, thread, host, port

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self, timeout: float = 10) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def _check_bind(host: str, port: int) -> None:
    try:
        with socket.socket(socket.AF_INET6 if ":" in host else socket.AF_INET, socket.SOCK_STREAM) as sock:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            sock.bind((host, port))
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from None


def serve(state: ServiceState, addr: str = "127.0.0.1:8080", block: bool = False) -> Optional[ServiceHandle]:
    """Run the service. With ``block=False`` it runs in a background thread and a handle is returned."""
    host, port = parse_addr(addr)
    if port == 0:
        with socket.socket() as sock:
            sock.bind((host, 0))
            port = sock.getsockname()[1]
    _check_bind(host, port)
    config = uvicorn.Config(create_app(state), host=host, port=port, log_level="warning", lifespan="off")
    server = uvicorn.Server(config)
    if block:
        server.run()
        return None
    thread = threading.Thread(target=server.run, name="nibs-kg-service", daemon=True)
    thread.start()
    while not server.started:
        if not thread.is_alive():
            raise BindFailure(f"service on {host}:{port} exited during startup")
        thread.join(0.02)
    return ServiceHandle(server, thread, host, port)
