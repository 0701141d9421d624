"""The rTMS dose vocabulary: 15 properties and their controlled term sets.

Labels are kept exactly as printed in the source table, including
near-duplicates such as ``MC125``/``MC-125`` and ``Cool B65``/``cool-B65``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import InvalidIri, UnknownEntity, VocabularyNotSeeded
from .store import Store
from .terms import OWL_SAME_AS, RDFS_SUBPROPERTY_OF, EntityKind, Iri, is_absolute_iri

_SEPARATORS = re.compile(r"[\s\-_]+")


def normalize(text: str) -> str:
    """Lowercase and collapse runs of whitespace, hyphens and underscores to ``-``."""
    return _SEPARATORS.sub("-", text.strip().lower())


# (label, description) pairs per controlled property, in table order.
TYPE_OF_RTMS = [
    ("rTMS", "Conventional rTMS"),
    ("iTBS", "Intermittent theta burst stimulation"),
    ("cTBS", "Continuous theta burst stimulation"),
    ("QPS", "Quadripulse stimulation"),
]
INTENSITY_APPROACH = [
    ("AMT", "Active motor threshold"),
    ("RMT", "Resting motor threshold"),
    ("MT", "Unspecified motor threshold"),
    ("FL", "Functional lesion"),
    ("PT", "Phosphene threshold"),
    ("FXD", "Fixed intensity"),
    ("EF", "Electric field"),
]
THRESHOLD_STRATEGIES = [
    ("ML", "Method of limit"),
    ("5STEP", "5 step procedure"),
    ("TH", "Threshold hunting"),
    ("MLTH", "Maximum likelihood based threshold hunting"),
    ("PEST", "Parameter estimation by sequential testing"),
    ("MTAT", "TMS Motor Threshold Assessment Tool"),
]
THRESHOLD_MEASUREMENT = [("E", "Electrode"), ("V", "Visual")]
STIMULATOR_COMPANY = [
    (name, None)
    for name in "Cad MedDan MagSti NeoNet NeuNet MagVen NexSti MagMor Yir BraSwa DeyDia YunTec NeuSof".split()
]
STIMULATOR_MODEL = [
    (name, None)
    for name in [
        "HS", "MP", "MES10", "R", "SR", "SR2", "NP", "16E05", "200", "200 2", "MLR25",
        "200 BI", "QP500", "HF", "MP30", "MPX100", "2100CRS", "MP100", "R2", "MPR30",
        "NBS", "PM100", "CCYI", "CCYIA", "DMXT", "NS", "Sys4.3", "R2P1", "N-MS/D", "MPC",
        "MS/D",
    ]
]
COIL_SHAPE = [("F8", None), ("R", None), ("F8-D", None), ("D", None)]
COIL_MODEL = [
    (name, None)
    for name in [
        "MC125", "MC-125", "MC-B70", "MCF-B70", "MCF-B-65", "MCF-B65", "WC", "AC", "DC",
        "PN9925", "992500", "C-B60", "FC", "FC-B70", "HP", "Cool B65", "cool-B65",
        "Cool-DB80", "Cool B56", "H-ADD", "H", "H1", "AF", "DB-80", "B65", "MMC-140",
        "70BF-Cool",
    ]
]

# Spellings used in running text for two stimulator models.
EXTRA_TERM_ALIASES = {"200 2": ("200_2",), "200 BI": ("200_BI",)}

MEP_UNIT_NOTE = (
    "Amplitude of the motor evoked potential: the unit appears both as mV and as "
    "microvolts; values are recorded as mV."
)


@dataclass(frozen=True)
class PropertyDef:
    label: str
    range: str  # "controlled" | "decimal" | "integer" | "string"
    terms: tuple = ()
    unit: Optional[str] = None
    aliases: tuple = ()
    sub_properties: tuple = ()


RTMS_PROPERTIES = (
    PropertyDef("Type of rTMS", "controlled", tuple(TYPE_OF_RTMS)),
    PropertyDef("Intrabust Frequency", "decimal", unit="Hz", aliases=("intraburst frequency",)),
    PropertyDef("Stimulation Intensity Selection Approach", "controlled", tuple(INTENSITY_APPROACH)),
    PropertyDef("Threshold-estimation strategies", "controlled", tuple(THRESHOLD_STRATEGIES)),
    PropertyDef("Threshold Measurement", "controlled", tuple(THRESHOLD_MEASUREMENT)),
    PropertyDef(
        "Amplitude of the Motor Evoked Potential",
        "decimal",
        unit="mV",
        aliases=(
            "amplitude of the motor evoked potential (mV)",
            "amplitude of the motor evoked potential in microvolts",
            "MEP amplitude",
        ),
    ),
    PropertyDef("Threshold Ratio", "decimal"),
    PropertyDef("Percentage or the Amplitude of the Motor Threshold Contraction", "decimal"),
    PropertyDef(
        "Percent of Stimulation Intensity",
        "decimal",
        unit="%",
        sub_properties=(
            PropertyDef("Percent of Stimulation Intensity (Min value)", "decimal", unit="%",
                        aliases=("percent min", "min value")),
            PropertyDef("Percent of Stimulation Intensity (Max value)", "decimal", unit="%",
                        aliases=("percent max", "max value")),
        ),
    ),
    PropertyDef("Maximum Stimulator Output", "decimal"),
    PropertyDef("Stimulator Company", "controlled", tuple(STIMULATOR_COMPANY)),
    PropertyDef("Stimulator Model", "controlled", tuple(STIMULATOR_MODEL)),
    PropertyDef("Coil Shape", "controlled", tuple(COIL_SHAPE)),
    PropertyDef("Coil Size", "decimal"),
    PropertyDef("Coil Model", "controlled", tuple(COIL_MODEL)),
)

# Paper-level metadata and structural vocabulary minted alongside the dose properties.
META_PROPERTIES = ("title", "doi", "year", "author", "has contribution")
PAPER_CLASS = "Paper"
CONTRIBUTION_CLASS = "Contribution"


@dataclass(frozen=True)
class ControlledTerm:
    label: str
    iri: Iri
    aliases: frozenset
    description: Optional[str] = None


@dataclass
class PropertySpec:
    label: str
    iri: Iri
    range: str
    unit: Optional[str] = None
    term_class: Optional[Iri] = None
    terms: list[ControlledTerm] = field(default_factory=list)
    aliases: frozenset = frozenset()
    sub_properties: list["PropertySpec"] = field(default_factory=list)

    @property
    def controlled(self) -> bool:
        return self.range == "controlled"


@dataclass(frozen=True)
class NoMatch:
    raw: str


@dataclass(frozen=True)
class Ambiguous:
    raw: str
    candidates: tuple


LookupResult = Union[ControlledTerm, NoMatch, Ambiguous]


@dataclass
class VocabularyManifest:
    properties: list[PropertySpec]
    term_index: dict[Iri, dict[str, ControlledTerm]]
    sameas_predicate: Iri
    meta: dict[str, Iri]
    paper_class: Iri
    contribution_class: Iri
    notes: list[str] = field(default_factory=list)

    def all_properties(self) -> list[PropertySpec]:
        """Top-level properties with their sub-properties inlined, in table order."""
        out = []
        for spec in self.properties:
            out.append(spec)
            out.extend(spec.sub_properties)
        return out

    def spec_for(self, iri: Iri) -> PropertySpec:
        for spec in self.all_properties():
            if spec.iri == iri:
                return spec
        raise KeyError(iri)

    def property(self, key: str) -> Optional[PropertySpec]:
        """Resolve a column key or label (label or alias, normalized) to a property."""
        wanted = normalize(key)
        for spec in self.all_properties():
            if wanted == normalize(spec.label) or wanted in spec.aliases:
                return spec
        return None

    def controlled_term_count(self) -> int:
        return sum(len(spec.terms) for spec in self.properties)


def _term_aliases(label: str) -> frozenset:
    extra = EXTRA_TERM_ALIASES.get(label, ())
    return frozenset({normalize(label), *(normalize(a) for a in extra)})


class _Builder:
    def __init__(self, store: Store, create: bool):
        self.store = store
        self.create = create

    def get(self, kind: EntityKind, label: str, member_of: Optional[Iri] = None) -> Iri:
        found = self.store.find(kind, label, member_of)
        if found:
            return found[0]
        if not self.create:
            raise VocabularyNotSeeded(f"{kind.value} {label!r} is missing; run seeding first")
        iri = self.store.mint_entity(kind, label)
        if member_of is not None:
            self.store.add_statement(iri, self.store.rdf_type, member_of)
        return iri

    def property_spec(self, pdef: PropertyDef, parent: Optional[Iri] = None) -> PropertySpec:
        iri = self.get(EntityKind.PROPERTY, pdef.label)
        if parent is not None and self.create:
            self.store.add_statement(iri, Iri(RDFS_SUBPROPERTY_OF), parent)
        spec = PropertySpec(
            label=pdef.label,
            iri=iri,
            range=pdef.range,
            unit=pdef.unit,
            aliases=frozenset({normalize(pdef.label), *(normalize(a) for a in pdef.aliases)}),
        )
        for sub in pdef.sub_properties:
            spec.sub_properties.append(self.property_spec(sub, parent=iri))
        return spec

    def build(self) -> VocabularyManifest:
        specs = [self.property_spec(pdef) for pdef in RTMS_PROPERTIES]
        meta = {label: self.get(EntityKind.PROPERTY, label) for label in META_PROPERTIES}
        paper_class = self.get(EntityKind.CLASS, PAPER_CLASS)
        contribution_class = self.get(EntityKind.CLASS, CONTRIBUTION_CLASS)
        term_index: dict[Iri, dict[str, ControlledTerm]] = {}
        for pdef, spec in zip(RTMS_PROPERTIES, specs):
            if pdef.range != "controlled":
                continue
            spec.term_class = self.get(EntityKind.CLASS, pdef.label)
            for label, description in pdef.terms:
                iri = self.get(EntityKind.RESOURCE, label, member_of=spec.term_class)
                spec.terms.append(ControlledTerm(label, iri, _term_aliases(label), description))
            term_index[spec.iri] = {t.label: t for t in spec.terms}
        return VocabularyManifest(
            properties=specs,
            term_index=term_index,
            sameas_predicate=Iri(OWL_SAME_AS),
            meta=meta,
            paper_class=paper_class,
            contribution_class=contribution_class,
            notes=[MEP_UNIT_NOTE],
        )


def seed_rtms_vocabulary(store: Store) -> VocabularyManifest:
    """Mint every property, class and controlled term; re-seeding changes nothing."""
    with store.lock.write():
        return _Builder(store, create=True).build()


def load_manifest(store: Store) -> VocabularyManifest:
    """Rebuild the manifest of an already-seeded store without writing to it."""
    with store.lock.read():
        return _Builder(store, create=False).build()


def lookup_term(manifest: VocabularyManifest, prop: Iri, raw: str) -> LookupResult:
    try:
        terms = manifest.term_index[prop]
    except KeyError:
        raise ValueError(f"{prop} does not have a controlled range") from None
    token = raw.strip()
    if token in terms:
        return terms[token]
    wanted = normalize(token)
    hits = [t for t in terms.values() if wanted in t.aliases]
    if len(hits) == 1:
        return hits[0]
    if hits:
        return Ambiguous(raw, tuple(hits))
    return NoMatch(raw)


def same_as_link(store: Store, local: Iri, external: str) -> int:
    if not store.has_entity(local):
        raise UnknownEntity(f"{local} is not a registered entity")
    if not isinstance(external, str) or not is_absolute_iri(external):
        raise InvalidIri(f"not an absolute IRI: {external!r}")
    with store.lock.write():
        target = store.register_external(external, EntityKind.RESOURCE)
        return store.add_statement(local, Iri(OWL_SAME_AS), target)


def export_vocabulary(manifest: VocabularyManifest) -> str:
    lines = []
    for spec in manifest.properties:
        for term in spec.terms:
            lines.append(f"{spec.label}\t{term.label}\t{term.iri}")
    return "\n".join(lines) + ("\n" if lines else "")
