"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (with measured runtime) that is printed
at the end of the pytest run, and asserts on the same condition.
"""

import math
import os
import random
import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

import httpx

from helpers import NS, multiset, mutable_fields, mutate_contribution, query_store, random_query, random_store
from nibs_kg.comparison import PublicationMetadata, PublicationRegistry, build_comparison, chunk_comparisons, publish_comparison
from nibs_kg.errors import TypeMismatch
from nibs_kg.ingest import generate_synthetic_corpus, ingest_corpus, list_contributions, record_to_contribution
from nibs_kg.query import execute, oracle_execute
from nibs_kg.rdf_io import parse_ntriples, serialize, serialize_triples
from nibs_kg.service import ServiceState, fair_report, serve
from nibs_kg.store import Store
from nibs_kg.template import define_rtms_template, validate
from nibs_kg.terms import OWL_SAME_AS, Iri
from nibs_kg.vocabulary import same_as_link, seed_rtms_vocabulary

RESULTS: list[str] = []


def record(number: int, title: str, passed: bool, elapsed: float, bound, detail: str = "") -> None:
    within = bound is None or elapsed < bound
    verdict = "PASS" if passed and within else "FAIL"
    limit = f" (limit {bound:.0f} s)" if bound is not None else ""
    line = f"[{verdict}] {number}. {title}: {elapsed:.2f} s{limit}" + (f"; {detail}" if detail else "")
    RESULTS.append(line)
    print(line)
    assert passed, detail
    assert within, f"took {elapsed:.2f} s, limit {bound} s"


def fresh():
    store = Store(NS)
    manifest = seed_rtms_vocabulary(store)
    return store, manifest, define_rtms_template(store, manifest)


def test_1_vocabulary_pinning():
    start = time.perf_counter()
    store = Store(NS)
    manifest = seed_rtms_vocabulary(store)
    elapsed = time.perf_counter() - start
    sizes = {p.label: len(p.terms) for p in manifest.properties if p.controlled}
    expected = {
        "Type of rTMS": 4,
        "Stimulation Intensity Selection Approach": 7,
        "Threshold-estimation strategies": 6,
        "Threshold Measurement": 2,
        "Stimulator Company": 13,
        "Stimulator Model": 31,
        "Coil Shape": 4,
        "Coil Model": 27,
    }
    subs = [len(p.sub_properties) for p in manifest.properties]
    ok = (
        len(manifest.properties) == 15
        and sizes == expected
        and manifest.controlled_term_count() == 94
        and subs == [2 if p.label == "Percent of Stimulation Intensity" else 0 for p in manifest.properties]
    )
    record(1, "vocabulary pinning", ok, elapsed, 1.0,
           f"{len(manifest.properties)} properties, {manifest.controlled_term_count()} terms, cardinalities {list(sizes.values())}")


def test_2_six_part_comparison():
    start = time.perf_counter()
    store, manifest, template = fresh()
    ingest_corpus(store, manifest, template, generate_synthetic_corpus(1, 600))
    parts = chunk_comparisons(store, list_contributions(store, manifest), 100, manifest=manifest)
    elapsed = time.perf_counter() - start
    sizes = [len(p) for p in parts]
    record(2, "six-part comparison", sizes == [100] * 6, elapsed, 30.0, f"part sizes {sizes}")


def test_3_rdf_round_trip():
    rng = random.Random(20240603)
    # log-uniform sizes up to 10,000 triples, with the extremes always present
    sizes = [0, 10_000] + [int(math.exp(rng.uniform(0, math.log(10_000)))) for _ in range(198)]
    start = time.perf_counter()
    failures = []
    total = 0
    for i, n in enumerate(sizes):
        store = random_store(random.Random(rng.getrandbits(64)), n)
        text = serialize(store)
        parsed = parse_ntriples(text)
        expected = store.export_triples()
        total += len(expected)
        if set(parsed) != set(expected) or len(parsed) != len(set(expected)):
            failures.append(f"store {i}: triple sets differ")
        elif serialize(store) != text or serialize_triples(parsed) != text:
            failures.append(f"store {i}: serialization not byte-stable")
    elapsed = time.perf_counter() - start
    record(3, "RDF round-trip", not failures, elapsed, 60.0,
           f"{len(sizes)} stores, {total} triples, {len(failures)} failures {failures[:3]}")


def test_4_query_oracle_equivalence():
    rng = random.Random(77)
    start = time.perf_counter()
    mismatches, mismatch_raised, largest = [], 0, 0
    for i in range(100):
        store = query_store(random.Random(rng.getrandbits(64)), rng.randint(1, 5000))
        largest = max(largest, len(store))
        query = random_query(random.Random(rng.getrandbits(64)), store)
        try:
            want = oracle_execute(store, query)
        except TypeMismatch:
            mismatch_raised += 1
            try:
                execute(store, query)
                mismatches.append(f"query {i}: engine missed TypeMismatch")
            except TypeMismatch:
                pass
            continue
        got = execute(store, query)
        if got.header != want.header or multiset(got) != multiset(want):
            mismatches.append(f"query {i}: result multisets differ")
    elapsed = time.perf_counter() - start
    record(4, "query oracle equivalence", not mismatches, elapsed, 120.0,
           f"100 queries, largest store {largest} triples, {mismatch_raised} raised TypeMismatch in both, "
           f"{len(mismatches)} mismatches {mismatches[:3]}")


def test_5_mutation_detection():
    start = time.perf_counter()
    store, manifest, template = fresh()
    rng = random.Random(5)
    exact = 0
    by_k = Counter()
    for i, rec in enumerate(generate_synthetic_corpus(55, 50)):
        contribution, report = record_to_contribution(store, manifest, template, rec)
        assert report.conforms
        k = i % 3 + 1
        fields = mutable_fields(store, contribution.iri, template)
        expected = mutate_contribution(store, contribution.iri, rng.sample(fields, k))
        codes = Counter(validate(store, contribution.iri, template).codes())
        by_k[k] += 1
        exact += codes == expected and sum(codes.values()) == k
    elapsed = time.perf_counter() - start
    record(5, "validation mutation detection", exact == 50, elapsed, 10.0,
           f"{exact}/50 exact (k=1: {by_k[1]}, k=2: {by_k[2]}, k=3: {by_k[3]})")


def test_6_fair_audit():
    start = time.perf_counter()
    store, manifest, template = fresh()
    summary = ingest_corpus(store, manifest, template, generate_synthetic_corpus(6, 10))
    table = build_comparison(store, [c.iri for c in summary.contributions], manifest=manifest)
    itbs = manifest.term_index[manifest.property("Type of rTMS").iri]["iTBS"].iri
    same_as_link(store, itbs, "http://purl.example.org/nibs/ITBS")
    licensed = PublicationRegistry()
    publish_comparison(licensed, table, PublicationMetadata("rTMS comparison", "Curator", "CC-BY-4.0"))
    unlicensed = PublicationRegistry()
    publish_comparison(unlicensed, table, PublicationMetadata("rTMS comparison", "Curator", None))

    names = ("findable", "accessible", "interoperable", "reusable")

    def outcome(report):
        return {n: getattr(report, n).passed for n in names}, all(getattr(report, n).evidence for n in names)

    full, full_ev = outcome(fair_report(store, licensed))
    no_license, nl_ev = outcome(fair_report(store, unlicensed))
    link = store.statements_matching(itbs, Iri(OWL_SAME_AS))[0]
    store.remove_statement(*link.triple)
    no_link, nk_ev = outcome(fair_report(store, licensed))
    elapsed = time.perf_counter() - start

    ok = (
        full == dict.fromkeys(names, True)
        and no_link == {**dict.fromkeys(names, True), "interoperable": False}
        and no_license == {**dict.fromkeys(names, True), "reusable": False}
        and full_ev and nl_ev and nk_ev
    )
    record(6, "FAIR audit behavior", ok, elapsed, None,
           f"full={full} without-same-as={no_link} without-license={no_license}")


def test_7_dereferenceability():
    start = time.perf_counter()
    store, manifest, template = fresh()
    state = ServiceState(store)
    minted = store.entities(external=False)
    failures = []
    with serve(state, "127.0.0.1:0") as handle, httpx.Client(base_url=handle.url, timeout=10) as client:
        for entity in minted:
            path = f"/{entity.kind.segment}/{entity.local_id}"
            for accept in ("application/n-triples", "application/json"):
                resp = client.get(path, headers={"Accept": accept})
                if resp.status_code != 200 or not resp.headers["content-type"].startswith(accept):
                    failures.append(f"{path} [{accept}] -> {resp.status_code}")
        rng = random.Random(7)
        known = {f"/{e.kind.segment}/{e.local_id}" for e in minted}
        random_paths = []
        while len(random_paths) < 20:
            kind = rng.choice(["resource", "property", "class", "template", "comparison", "misc"])
            path = f"/{kind}/{rng.choice('RPCTX')}{rng.randint(0, 10**6)}"
            if path not in known:
                random_paths.append(path)
        for path in random_paths:
            status = client.get(path).status_code
            if status != 404:
                failures.append(f"{path} -> {status}")
        dump = client.get("/rdf/dump").content
        if dump != serialize(store).encode("utf-8"):
            failures.append("/rdf/dump differs from canonical serialization")
    elapsed = time.perf_counter() - start
    record(7, "dereferenceability", not failures, elapsed, 30.0,
           f"{len(minted)} minted IRIs x 2 representations, 20 unknown paths, {len(failures)} failures {failures[:3]}")


def _pipeline(workdir: Path) -> bytes:
    env = {**os.environ, "NIBS_KG_NAMESPACE": "http://localhost:8080"}
    store, corpus, dump = workdir / "kg", workdir / "corpus.csv", workdir / "dump.nt"
    steps = [
        ["seed", "--store", store],
        ["synth", "--seed", "1", "--n", "600", "--out", corpus],
        ["ingest", "--csv", corpus, "--store", store],
        ["export", "--store", store, "--output", dump],
    ]
    for step in steps:
        proc = subprocess.run([sys.executable, "-m", "nibs_kg", *map(str, step)], env=env,
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
    return dump.read_bytes()


def test_8_end_to_end_determinism(tmp_path):
    start = time.perf_counter()
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    first, second = _pipeline(tmp_path / "a"), _pipeline(tmp_path / "b")
    elapsed = time.perf_counter() - start
    record(8, "end-to-end determinism", first == second and len(first) > 0, elapsed, None,
           f"two runs, {len(first)} and {len(second)} bytes, identical={first == second}")
