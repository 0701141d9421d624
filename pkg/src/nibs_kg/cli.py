"""Command-line entry point for batch curation runs.

Exit codes: 0 success, 1 completed with violations, 2 usage/parse/config
error, 3 I/O error. A store is addressed by a base path ``S``; its files are
``S.nt``, ``S.reg`` and the publication registry ``S.pub.json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .comparison import (
    PublicationMetadata,
    PublicationRegistry,
    chunk_comparisons,
    export_comparison,
)
from .errors import (
    DanglingReference,
    KgError,
    MalformedCsv,
    MappingError,
    MissingTitleColumn,
    NotFound,
    ParseError,
    QuerySyntaxError,
    TypeMismatch,
    UnboundVariable,
    UnknownPrefix,
    VocabularyNotSeeded,
)
from .ingest import (
    check_mapping,
    generate_synthetic_corpus,
    ingest_corpus,
    list_contributions,
    load_mapping,
    parse_csv,
    write_csv,
)
from .query import execute, parse_query, result_to_csv, result_to_json
from .rdf_io import SerializationOptions, read_snapshot, save_snapshot, serialize, snapshot_exists
from .store import Store
from .template import define_rtms_template, load_template, validate
from .terms import Iri
from .vocabulary import export_vocabulary, load_manifest, same_as_link, seed_rtms_vocabulary

log = logging.getLogger("nibs_kg")

OK, VIOLATIONS, USAGE, IO_ERROR = 0, 1, 2, 3
FORMAT_EXT = {"csv": "csv", "json": "json", "md": "md"}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _registry_path(store: str) -> Path:
    return Path(store + ".pub.json")


def _load(store: str) -> Store:
    if not snapshot_exists(store):
        raise CliError(IO_ERROR, f"no store snapshot at {store}.nt / {store}.reg (run 'seed' first)")
    return read_snapshot(store)


def _seeded(store: Store):
    manifest = load_manifest(store)
    return manifest, load_template(store, manifest)


def _contribution_iri(store: Store, text: str) -> Iri:
    entity = store.by_local_id(text)
    if entity is not None:
        return entity.iri
    return Iri(text)


# -- subcommands -------------------------------------------------------


def cmd_seed(args, out) -> int:
    if snapshot_exists(args.store):
        store = read_snapshot(args.store)
    else:
        store = Store(args.namespace)
    manifest = seed_rtms_vocabulary(store)
    template = define_rtms_template(store, manifest)
    save_snapshot(store, args.store)
    print(f"seeded {len(manifest.properties)} properties, {manifest.controlled_term_count()} controlled terms", file=out)
    print(f"template {template.iri} with {len(template.shapes)} shapes", file=out)
    print(f"store {args.store}: {len(store.entities())} entities, {len(store)} statements", file=out)
    return OK


def cmd_synth(args, out) -> int:
    records = generate_synthetic_corpus(args.seed, args.n)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_csv(records, fh)
    print(f"wrote {len(records)} synthetic records to {args.out}", file=out)
    return OK


def cmd_ingest(args, out) -> int:
    store = _load(args.store)
    manifest, template = _seeded(store)
    mapping = None
    if args.map:
        mapping = load_mapping(Path(args.map).read_text(encoding="utf-8"))
        check_mapping(mapping, manifest)
    with open(args.csv, encoding="utf-8", newline="") as fh:
        records = parse_csv(fh, mapping)
    summary = ingest_corpus(store, manifest, template, records)
    save_snapshot(store, args.store)
    print(json.dumps(summary.to_dict(), ensure_ascii=False, indent=2), file=out)
    for contribution, report in zip(summary.contributions, summary.reports):
        for line in report.to_lines():
            if line.startswith("VIOLATION"):
                print(f"{contribution.iri}\t{line}", file=out)
    return VIOLATIONS if summary.with_violations else OK


def cmd_validate(args, out) -> int:
    store = _load(args.store)
    manifest, template = _seeded(store)
    targets = [_contribution_iri(store, args.contribution)] if args.contribution else list_contributions(store, manifest)
    reports = [validate(store, iri, template) for iri in targets]
    if args.format == "json":
        print(json.dumps([r.to_dict() for r in reports], ensure_ascii=False, indent=2), file=out)
    else:
        for report in reports:
            for line in report.to_lines():
                print(f"{report.contribution}\t{line}", file=out)
        bad = sum(not r.conforms for r in reports)
        print(f"{len(reports)} contributions validated, {bad} with violations", file=out)
    return VIOLATIONS if any(not r.conforms for r in reports) else OK


def cmd_export(args, out) -> int:
    store = _load(args.store)
    fmt = {"nt": "ntriples", "ttl": "turtle"}[args.format]
    text = serialize(store, SerializationOptions(format=fmt))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        out.write(text)
    return OK


def cmd_query(args, out) -> int:
    store = _load(args.store)
    text = Path(args.file).read_text(encoding="utf-8") if args.file else args.text
    result = execute(store, parse_query(text))
    out.write(result_to_csv(result) if args.out == "csv" else result_to_json(result))
    return OK


def cmd_compare(args, out) -> int:
    store = _load(args.store)
    manifest = load_manifest(store)
    tables = chunk_comparisons(store, list_contributions(store, manifest), args.chunk_size, args.mode, manifest)
    target = Path(args.out)
    target.mkdir(parents=True, exist_ok=True)
    ext = FORMAT_EXT[args.format]
    for table in tables:
        k, n = table.part_index
        path = target / f"comparison-part-{k}-of-{n}.{ext}"
        path.write_text(export_comparison(table, args.format), encoding="utf-8", newline="")
        print(f"{path}\t{len(table)} contributions\t{len(table.rows)} properties", file=out)
    print(f"{len(tables)} comparison parts written to {target}", file=out)
    return OK


def cmd_publish(args, out) -> int:
    store = _load(args.store)
    manifest = load_manifest(store)
    tables = chunk_comparisons(store, list_contributions(store, manifest), args.chunk_size, args.mode, manifest)
    if not 1 <= args.part <= len(tables):
        raise CliError(USAGE, f"--part must be between 1 and {len(tables)}, got {args.part}")
    registry = PublicationRegistry(_registry_path(args.store))
    meta = PublicationMetadata(args.title, args.creator, args.license, args.description)
    record = registry.publish(tables[args.part - 1], meta, args.predecessor)
    print(json.dumps({"id": record.id, "version": record.version, "predecessor": record.predecessor,
                      "created_at": record.created_at}, indent=2), file=out)
    return OK


def cmd_link(args, out) -> int:
    store = _load(args.store)
    ordinal = same_as_link(store, _contribution_iri(store, args.local), args.external)
    save_snapshot(store, args.store)
    print(f"same-as statement {ordinal}", file=out)
    return OK


def cmd_vocab(args, out) -> int:
    out.write(export_vocabulary(load_manifest(_load(args.store))))
    return OK


def cmd_serve(args, out) -> int:
    from .service import ServiceState, serve

    _load(args.store)
    state = ServiceState.from_paths(args.store, _registry_path(args.store))
    print(f"serving {args.store} on http://{args.addr}", file=out)
    serve(state, args.addr, block=True)
    return OK


def cmd_fair_report(args, out) -> int:
    from .service import fair_report

    store = _load(args.store)
    report = fair_report(store, PublicationRegistry(_registry_path(args.store)))
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2), file=out)
    else:
        print("\n".join(report.summary_lines()), file=out)
    return OK if report.passed else VIOLATIONS


# -- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nibs-kg", description="FAIR semantic publishing of rTMS dose records")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("seed", cmd_seed, "create a store with the rTMS vocabulary and template")
    p.add_argument("--store", required=True)
    p.add_argument("--namespace", help="minting namespace (default: $NIBS_KG_NAMESPACE or http://localhost:8080)")

    p = add("synth", cmd_synth, "write a deterministic synthetic study corpus as CSV")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)

    p = add("ingest", cmd_ingest, "ingest a CSV corpus into a store")
    p.add_argument("--csv", required=True)
    p.add_argument("--map", help="column mapping file (column = property label)")
    p.add_argument("--store", required=True)

    p = add("validate", cmd_validate, "validate contributions against the rTMS template")
    p.add_argument("--store", required=True)
    p.add_argument("--contribution", help="contribution IRI or local id (default: all)")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = add("export", cmd_export, "serialize the store")
    p.add_argument("--store", required=True)
    p.add_argument("--format", choices=["nt", "ttl"], default="nt")
    p.add_argument("--output", help="write to this file instead of standard output")

    p = add("query", cmd_query, "run a SELECT query")
    p.add_argument("--store", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file")
    src.add_argument("--text")
    p.add_argument("--out", choices=["csv", "json"], default="csv")

    p = add("compare", cmd_compare, "write chunked comparison tables")
    p.add_argument("--store", required=True)
    p.add_argument("--chunk-size", type=int, default=100)
    p.add_argument("--mode", choices=["union", "intersection"], default="union")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json", "md"], default="csv")

    p = add("publish", cmd_publish, "publish one comparison part under a pseudo-DOI")
    p.add_argument("--store", required=True)
    p.add_argument("--part", type=int, required=True)
    p.add_argument("--title", required=True)
    p.add_argument("--license", required=True)
    p.add_argument("--creator", default="nibs-kg curator")
    p.add_argument("--description", default="")
    p.add_argument("--predecessor")
    p.add_argument("--chunk-size", type=int, default=100)
    p.add_argument("--mode", choices=["union", "intersection"], default="union")

    p = add("link", cmd_link, "add a same-as link from a local entity to an external IRI")
    p.add_argument("--store", required=True)
    p.add_argument("--local", required=True, help="local IRI or local id such as R1")
    p.add_argument("--external", required=True)

    p = add("vocab", cmd_vocab, "list controlled terms as TSV")
    p.add_argument("--store", required=True)

    p = add("serve", cmd_serve, "serve the store over HTTP")
    p.add_argument("--store", required=True)
    p.add_argument("--addr", default="127.0.0.1:8080")

    p = add("fair-report", cmd_fair_report, "audit FAIR compliance")
    p.add_argument("--store", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    return parser


_USAGE_ERRORS = (
    ParseError, DanglingReference, MalformedCsv, MissingTitleColumn, MappingError, VocabularyNotSeeded,
    QuerySyntaxError, UnknownPrefix, UnboundVariable, TypeMismatch, NotFound,
)


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        old_stderr, sys.stderr = sys.stderr, err
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stderr = old_stderr
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=err)
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=err)
        return exc.code
    except _USAGE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return USAGE
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return IO_ERROR
    except KgError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
