"""Templates: shape constraints over contribution subgraphs, and their validation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import UnknownEntity, VocabularyNotSeeded
from .store import Store
from .terms import EntityKind, Iri, Literal
from .vocabulary import EXTRA_TERM_ALIASES, PropertySpec, VocabularyManifest, normalize

RTMS_TEMPLATE_LABEL = "rTMS dose template"
SHAPE_CLASS = "Property Shape"
SHAPE_PROPERTIES = ("has shape", "target class", "shape path", "min count", "max count", "value range", "has sub-shape")
REQUIRED = {"Type of rTMS"}


class Code(enum.Enum):
    MISSING_REQUIRED = "MissingRequired"
    NOT_IN_VOCABULARY = "NotInVocabulary"
    WRONG_DATATYPE = "WrongDatatype"
    CARDINALITY_EXCEEDED = "CardinalityExceeded"
    UNKNOWN_EXTRA_PROPERTY = "UnknownExtraProperty"

    def __str__(self) -> str:
        return self.value


_CODE_ORDER = {code: i for i, code in enumerate(Code)}


@dataclass
class PropertyShape:
    property: Iri
    label: str
    range: Union[Iri, str]  # controlled class IRI or datatype name
    min_count: int = 0
    max_count: Optional[int] = 1  # None means unbounded
    iri: Optional[Iri] = None
    sub_shapes: list["PropertyShape"] = field(default_factory=list)

    def __post_init__(self):
        if self.min_count < 0 or (self.max_count is not None and self.max_count < max(1, self.min_count)):
            raise ValueError(f"inconsistent cardinality for {self.label}: {self.min_count}..{self.max_count}")

    @property
    def required(self) -> bool:
        return self.min_count >= 1

    @property
    def controlled(self) -> bool:
        return isinstance(self.range, Iri)


@dataclass
class Template:
    iri: Iri
    label: str
    target_class: Iri
    shapes: list[PropertyShape]

    def __post_init__(self):
        props = [s.property for s in self.flat_shapes()]
        if len(props) != len(set(props)):
            raise ValueError("template shapes must constrain pairwise distinct properties")

    def flat_shapes(self) -> list[PropertyShape]:
        out = []
        for shape in self.shapes:
            out.append(shape)
            out.extend(shape.sub_shapes)
        return out

    def shape_for(self, prop: Iri) -> Optional[PropertyShape]:
        for shape in self.flat_shapes():
            if shape.property == prop:
                return shape
        return None


@dataclass(frozen=True)
class Finding:
    shape: Optional[str]  # shape label, None for findings outside the template
    code: Code
    detail: str


@dataclass
class ValidationReport:
    contribution: Iri
    violations: list[Finding] = field(default_factory=list)
    infos: list[Finding] = field(default_factory=list)

    @property
    def conforms(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code.value for v in self.violations]

    def to_lines(self) -> list[str]:
        lines = [f"VIOLATION\t{v.code}\t{v.shape or '-'}\t{v.detail}" for v in self.violations]
        lines += [f"INFO\t{i.code}\t{i.shape or '-'}\t{i.detail}" for i in self.infos]
        return lines

    def to_dict(self) -> dict:
        return {
            "contribution": self.contribution.value,
            "conforms": self.conforms,
            "violations": [{"shape": v.shape, "code": v.code.value, "detail": v.detail} for v in self.violations],
            "infos": [{"shape": i.shape, "code": i.code.value, "detail": i.detail} for i in self.infos],
        }


def _shape_for_spec(spec: PropertySpec, required: bool) -> PropertyShape:
    shape = PropertyShape(
        property=spec.iri,
        label=spec.label,
        range=spec.term_class if spec.controlled else spec.range,
        min_count=1 if required else 0,
        max_count=1,
    )
    shape.sub_shapes = [_shape_for_spec(sub, False) for sub in spec.sub_properties]
    return shape


def _build_template(store: Store, manifest: VocabularyManifest, create: bool) -> Template:
    def get(kind, label, member_of=None):
        found = store.find(kind, label, member_of)
        if found:
            return found[0], False
        if not create:
            raise VocabularyNotSeeded(f"{kind.value} {label!r} is missing; define the template first")
        iri = store.mint_entity(kind, label)
        if member_of is not None:
            store.add_statement(iri, store.rdf_type, member_of)
        return iri, True

    preds = {label: get(EntityKind.PROPERTY, label)[0] for label in SHAPE_PROPERTIES}
    shape_class, _ = get(EntityKind.CLASS, SHAPE_CLASS)
    tpl_iri, _ = get(EntityKind.TEMPLATE, RTMS_TEMPLATE_LABEL)
    shapes = [_shape_for_spec(spec, spec.label in REQUIRED) for spec in manifest.properties]

    def emit(shape: PropertyShape, owner: Iri, link: Iri):
        shape.iri, fresh = get(EntityKind.RESOURCE, f"{shape.label} shape", member_of=shape_class)
        if create:
            store.add_statement(owner, link, shape.iri)
            store.add_statement(shape.iri, preds["shape path"], shape.property)
            store.add_statement(shape.iri, preds["min count"], Literal(str(shape.min_count), "integer"))
            if shape.max_count is not None:
                store.add_statement(shape.iri, preds["max count"], Literal(str(shape.max_count), "integer"))
            rng = shape.range if isinstance(shape.range, Iri) else Literal(shape.range)
            store.add_statement(shape.iri, preds["value range"], rng)
        for sub in shape.sub_shapes:
            emit(sub, shape.iri, preds["has sub-shape"])

    for shape in shapes:
        emit(shape, tpl_iri, preds["has shape"])
    if create:
        store.add_statement(tpl_iri, preds["target class"], manifest.contribution_class)
    return Template(tpl_iri, RTMS_TEMPLATE_LABEL, manifest.contribution_class, shapes)


def define_rtms_template(store: Store, manifest: VocabularyManifest) -> Template:
    with store.lock.write():
        return _build_template(store, manifest, create=True)


def load_template(store: Store, manifest: VocabularyManifest) -> Template:
    with store.lock.read():
        return _build_template(store, manifest, create=False)


def _describe(store: Store, term) -> str:
    if isinstance(term, Iri):
        entity_label = store.label(term) if store.has_entity(term) else None
        return f"<{term.value}>" + (f" ({entity_label})" if entity_label else "")
    return repr(term.lexical)


def _candidates(store: Store, cls: Iri, lexical: str) -> list[str]:
    wanted = normalize(lexical)
    members = [st.subject for st in store.statements_matching(None, store.rdf_type, cls)]
    out = []
    for iri in members:
        label = store.label(iri)
        forms = {normalize(label), *(normalize(a) for a in EXTRA_TERM_ALIASES.get(label, ()))}
        if wanted in forms:
            out.append(label)
    return sorted(out)


def _check_shape(store: Store, shape: PropertyShape, values: list) -> list[Finding]:
    found = []
    if shape.required and not values:
        found.append(Finding(shape.label, Code.MISSING_REQUIRED, f"no value for required property {shape.label!r}"))
    for value in values:
        if shape.controlled:
            if isinstance(value, Iri) and (value, store.rdf_type, shape.range) in store:
                continue
            detail = f"{_describe(store, value)} is not a term of {store.label(shape.range)!r}"
            if isinstance(value, Literal):
                cands = _candidates(store, shape.range, value.lexical)
                if len(cands) > 1:
                    detail += f"; ambiguous between {' | '.join(cands)}"
            found.append(Finding(shape.label, Code.NOT_IN_VOCABULARY, detail))
        elif shape.range in ("decimal", "integer"):
            ok = isinstance(value, Literal) and (
                value.is_numeric if shape.range == "decimal" else value.datatype == "integer"
            )
            if not ok:
                found.append(Finding(shape.label, Code.WRONG_DATATYPE,
                                     f"{_describe(store, value)} is not a {shape.range}"))
        elif shape.range == "string":
            if not (isinstance(value, Literal) and value.datatype == "string"):
                found.append(Finding(shape.label, Code.WRONG_DATATYPE, f"{_describe(store, value)} is not a string"))
    if shape.max_count is not None and len(values) > shape.max_count:
        found.append(Finding(shape.label, Code.CARDINALITY_EXCEEDED,
                             f"{len(values)} values, at most {shape.max_count} allowed"))
    return found


def validate(store: Store, contribution: Iri, template: Template) -> ValidationReport:
    with store.lock.read():
        if not store.has_entity(contribution):
            raise UnknownEntity(f"{contribution} is not a registered entity")
        outgoing = store.statements_matching(contribution)
        by_pred: dict[Iri, list] = {}
        for st in outgoing:
            by_pred.setdefault(st.predicate, []).append(st.object)

        report = ValidationReport(contribution)
        for shape in template.flat_shapes():
            findings = _check_shape(store, shape, by_pred.get(shape.property, []))
            findings.sort(key=lambda f: _CODE_ORDER[f.code])
            report.violations.extend(findings)

        known = {s.property for s in template.flat_shapes()} | {store.rdf_type}
        extras = sorted((p for p in by_pred if p not in known), key=lambda p: (store.label(p), p.value))
        for pred in extras:
            report.infos.append(Finding(None, Code.UNKNOWN_EXTRA_PROPERTY,
                                        f"{store.label(pred)!r} is not constrained by {template.label!r}"))
        return report
