import re
import time
from collections import defaultdict

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nibs_kg.errors import InvalidIri, UnknownEntity
from nibs_kg.service import fair_report
from nibs_kg.comparison import PublicationRegistry
from nibs_kg.store import Store
from nibs_kg.terms import OWL_SAME_AS, Iri
from nibs_kg.vocabulary import (
    Ambiguous,
    ControlledTerm,
    NoMatch,
    _term_aliases,
    export_vocabulary,
    load_manifest,
    lookup_term,
    normalize,
    same_as_link,
    seed_rtms_vocabulary,
)

# Source table rows, transcribed independently of the module constants.
TABLE_ROWS = {
    "Type of rTMS": "rTMS, iTBS, cTBS, QPS",
    "Stimulation Intensity Selection Approach": "AMT, RMT, MT, FL, PT, FXD, EF",
    "Threshold-estimation strategies": "ML, 5STEP, TH, MLTH, PEST, MTAT",
    "Threshold Measurement": "E, V",
    "Stimulator Company": "Cad, MedDan, MagSti, NeoNet, NeuNet, MagVen, NexSti, MagMor, Yir, BraSwa, DeyDia, YunTec, NeuSof",
    "Stimulator Model": "HS, MP, MES10, R, SR, SR2, NP, 16E05, 200, 200 2, MLR25, 200 BI, QP500, HF, MP30, MPX100, "
    "2100CRS, MP100, R2, MPR30, NBS, PM100, CCYI, CCYIA, DMXT, NS, Sys4.3, R2P1, N-MS/D, MPC, MS/D",
    "Coil Shape": "F8, R, F8-D, D",
    "Coil Model": "MC125, MC-125, MC-B70, MCF-B70, MCF-B-65, MCF-B65, WC, AC, DC, PN9925, 992500, C-B60, FC, FC-B70, "
    "HP, Cool B65, cool-B65, Cool-DB80, Cool B56, H-ADD, H, H1, AF, DB-80, B65, MMC-140, 70BF-Cool",
}
EXPECTED_SIZES = {
    "Type of rTMS": 4,
    "Stimulation Intensity Selection Approach": 7,
    "Threshold-estimation strategies": 6,
    "Threshold Measurement": 2,
    "Stimulator Company": 13,
    "Stimulator Model": 31,
    "Coil Shape": 4,
    "Coil Model": 27,
}


def test_fifteen_properties_in_table_order(seeded):
    _, manifest, _ = seeded
    assert [p.label for p in manifest.properties] == [
        "Type of rTMS",
        "Intrabust Frequency",
        "Stimulation Intensity Selection Approach",
        "Threshold-estimation strategies",
        "Threshold Measurement",
        "Amplitude of the Motor Evoked Potential",
        "Threshold Ratio",
        "Percentage or the Amplitude of the Motor Threshold Contraction",
        "Percent of Stimulation Intensity",
        "Maximum Stimulator Output",
        "Stimulator Company",
        "Stimulator Model",
        "Coil Shape",
        "Coil Size",
        "Coil Model",
    ]


def test_cardinalities(seeded):
    _, manifest, _ = seeded
    sizes = {p.label: len(p.terms) for p in manifest.properties if p.controlled}
    assert sizes == EXPECTED_SIZES
    assert manifest.controlled_term_count() == 94


@pytest.mark.parametrize("prop", sorted(TABLE_ROWS))
def test_term_labels_verbatim(seeded, prop):
    _, manifest, _ = seeded
    assert [t.label for t in manifest.property(prop).terms] == TABLE_ROWS[prop].split(", ")


def test_coil_shape_terms(seeded):
    _, manifest, _ = seeded
    assert {t.label for t in manifest.property("Coil Shape").terms} == {"F8", "R", "F8-D", "D"}


def test_percent_sub_properties(seeded):
    _, manifest, _ = seeded
    percent = manifest.property("Percent of Stimulation Intensity")
    assert [s.label for s in percent.sub_properties] == [
        "Percent of Stimulation Intensity (Min value)",
        "Percent of Stimulation Intensity (Max value)",
    ]
    assert all(not p.sub_properties for p in manifest.properties if p is not percent)


def test_numeric_properties_are_decimal(seeded):
    _, manifest, _ = seeded
    numeric = [p.label for p in manifest.all_properties() if not p.controlled]
    assert len(numeric) == 9
    assert all(manifest.property(label).range == "decimal" for label in numeric)
    assert manifest.property("Amplitude of the Motor Evoked Potential").unit == "mV"
    assert any("microvolts" in note for note in manifest.notes)


def test_property_aliases(seeded):
    _, manifest, _ = seeded
    assert manifest.property("intraburst frequency").label == "Intrabust Frequency"
    assert manifest.property("percent min").label.endswith("(Min value)")
    assert manifest.property("coil_shape").label == "Coil Shape"
    assert manifest.property("no such thing") is None


def test_seed_is_idempotent(seeded):
    store, manifest, _ = seeded
    before = (len(store), len(store.entities()))
    again = seed_rtms_vocabulary(store)
    assert again == manifest
    assert (len(store), len(store.entities())) == before


def test_seed_twice_on_fresh_stores_gives_equal_stores():
    a, b = Store("http://kg.test"), Store("http://kg.test")
    seed_rtms_vocabulary(a)
    seed_rtms_vocabulary(b)
    seed_rtms_vocabulary(b)
    assert a == b


def test_load_manifest_matches_seed(seeded):
    store, manifest, _ = seeded
    assert load_manifest(store) == manifest


def test_seeding_is_fast():
    start = time.perf_counter()
    seed_rtms_vocabulary(Store("http://kg.test"))
    assert time.perf_counter() - start < 1.0


def test_lookup_exact(seeded):
    _, m, _ = seeded
    coil = m.property("Coil Shape").iri
    assert lookup_term(m, coil, "F8").label == "F8"


def test_lookup_case_normalized(seeded):
    _, m, _ = seeded
    coil = m.property("Coil Shape").iri
    assert lookup_term(m, coil, "f8").label == "F8"
    assert lookup_term(m, coil, "f8_d").label == "F8-D"


def test_lookup_no_match(seeded):
    _, m, _ = seeded
    assert lookup_term(m, m.property("Coil Shape").iri, "triangle") == NoMatch("triangle")


def test_lookup_requires_controlled_property(seeded):
    _, m, _ = seeded
    with pytest.raises(ValueError):
        lookup_term(m, m.property("Coil Size").iri, "5")


def _independent_normalize(text):
    return re.sub(r"[ _\-]+", "~", text.lower())


def test_coil_model_collision_set_derived(seeded):
    # oracle: group the transcribed labels under the stated normalization
    groups = defaultdict(list)
    for label in TABLE_ROWS["Coil Model"].split(", "):
        groups[_independent_normalize(label)].append(label)
    collisions = [sorted(g) for g in groups.values() if len(g) > 1]
    assert collisions == [["Cool B65", "cool-B65"]]

    _, m, _ = seeded
    hit = lookup_term(m, m.property("Coil Model").iri, "cool b65")
    assert isinstance(hit, Ambiguous)
    assert sorted(t.label for t in hit.candidates) == collisions[0]


def test_exact_label_wins_over_collision(seeded):
    _, m, _ = seeded
    coil_model = m.property("Coil Model").iri
    assert lookup_term(m, coil_model, "Cool B65").label == "Cool B65"
    assert lookup_term(m, coil_model, "cool-B65").label == "cool-B65"


def test_underscore_spellings_resolve(seeded):
    _, m, _ = seeded
    model = m.property("Stimulator Model").iri
    assert lookup_term(m, model, "200_2").label == "200 2"
    assert lookup_term(m, model, "200_BI").label == "200 BI"
    assert lookup_term(m, model, "200").label == "200"


@given(st.text(alphabet="abcdefgBCDFHM8-_ 0123456", max_size=10))
def test_lookup_soundness(raw):
    store = Store("http://kg.test")
    m = seed_rtms_vocabulary(store)
    for spec in m.properties:
        if not spec.controlled:
            continue
        hit = lookup_term(m, spec.iri, raw)
        if isinstance(hit, ControlledTerm):
            assert hit.label == raw.strip() or normalize(raw) in hit.aliases
            assert normalize(raw) in hit.aliases


def test_alias_determinism():
    for label in TABLE_ROWS["Coil Model"].split(", "):
        assert _term_aliases(label) == _term_aliases(label)
        assert _term_aliases(label) == frozenset({normalize(label)})


def test_same_as_link_adds_one_statement(seeded):
    store, m, _ = seeded
    itbs = m.term_index[m.property("Type of rTMS").iri]["iTBS"].iri
    before = len(store)
    same_as_link(store, itbs, "http://purl.example.org/onto/ITBS")
    assert len(store) == before + 1
    assert store.entity(Iri("http://purl.example.org/onto/ITBS")).external


def test_same_as_link_rejects_malformed(seeded):
    store, m, _ = seeded
    itbs = m.term_index[m.property("Type of rTMS").iri]["iTBS"].iri
    with pytest.raises(InvalidIri):
        same_as_link(store, itbs, "not a uri")


def test_same_as_link_unknown_local(seeded):
    store, _, _ = seeded
    with pytest.raises(UnknownEntity):
        same_as_link(store, Iri("http://kg.test/resource/R9999"), "http://x.org/y")


def test_same_as_link_visible_to_fair_report(seeded):
    store, m, _ = seeded
    registry = PublicationRegistry()
    before = fair_report(store, registry).interoperable
    same_as_link(store, m.property("Coil Shape").terms[0].iri, "http://x.org/onto/F8")
    after = fair_report(store, registry).interoperable
    count = lambda p: int(p.evidence[1].detail.split()[0])  # noqa: E731
    assert (count(before), count(after)) == (0, 1)
    assert store.count_matching(None, Iri(OWL_SAME_AS)) == 1


def test_export_vocabulary_lists_all_terms(seeded):
    _, m, _ = seeded
    lines = export_vocabulary(m).splitlines()
    assert len(lines) == 94
    assert lines[0].split("\t")[:2] == ["Type of rTMS", "rTMS"]
