"""RDF atoms: IRIs, typed literals and entity kinds."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

from .errors import InvalidIri, InvalidLiteral

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
RDFS_SUBPROPERTY_OF = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf"
OWL_SAME_AS = "http://www.w3.org/2002/07/owl#sameAs"

DATATYPES = ("string", "integer", "decimal", "boolean")

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
# characters that may not appear inside an N-Triples IRIREF
_IRI_FORBIDDEN = re.compile(r'[\x00-\x20<>"{}|^`\\\x7f]')
_LANG = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")
_INTEGER = re.compile(r"^[+-]?[0-9]+$")
_DECIMAL = re.compile(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$")


class EntityKind(enum.Enum):
    RESOURCE = "Resource"
    PROPERTY = "Property"
    CLASS = "Class"
    TEMPLATE = "Template"

    @property
    def prefix(self) -> str:
        return self.value[0]

    @property
    def segment(self) -> str:
        return self.value.lower()

    @classmethod
    def from_prefix(cls, letter: str) -> "EntityKind":
        for kind in cls:
            if kind.prefix == letter:
                return kind
        raise ValueError(f"no entity kind with prefix {letter!r}")


@dataclass(frozen=True, slots=True, order=True)
class Iri:
    """An absolute IRI, compared and hashed by its full string value."""

    value: str

    def __post_init__(self):
        if not is_absolute_iri(self.value):
            raise InvalidIri(f"not an absolute IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value


def is_absolute_iri(text: str) -> bool:
    return bool(text) and bool(_SCHEME.match(text)) and not _IRI_FORBIDDEN.search(text)


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = "string"
    lang: Optional[str] = None

    def __post_init__(self):
        if self.datatype not in DATATYPES:
            raise InvalidLiteral(f"unsupported datatype {self.datatype!r}")
        if self.lang is not None:
            if self.datatype != "string":
                raise InvalidLiteral("language tags are only allowed on string literals")
            if not _LANG.match(self.lang):
                raise InvalidLiteral(f"malformed language tag {self.lang!r}")
        if not lexical_is_valid(self.lexical, self.datatype):
            raise InvalidLiteral(f"{self.lexical!r} is not a valid {self.datatype}")

    @property
    def datatype_iri(self) -> str:
        return XSD + self.datatype

    @property
    def is_numeric(self) -> bool:
        return self.datatype in ("integer", "decimal")

    def numeric_value(self) -> Decimal:
        return Decimal(self.lexical)

    @classmethod
    def decimal(cls, value) -> "Literal":
        return cls(minimal_decimal(Decimal(str(value))), "decimal")


Term = Union[Iri, Literal]


def lexical_is_valid(lexical: str, datatype: str) -> bool:
    if datatype == "string":
        return True
    if datatype == "integer":
        return bool(_INTEGER.match(lexical))
    if datatype == "decimal":
        return bool(_DECIMAL.match(lexical))
    if datatype == "boolean":
        return lexical in ("true", "false", "1", "0")
    return False


def parse_decimal(text: str) -> Optional[Decimal]:
    """Return the value of a plain base-10 number, or None if ``text`` is not one."""
    text = text.strip()
    if not _DECIMAL.match(text):
        return None
    try:
        value = Decimal(text)
    except InvalidOperation:
        return None
    return value if value.is_finite() else None


def minimal_decimal(value: Decimal) -> str:
    """Shortest plain lexical form: no exponent, no trailing zeros, no "-0"."""
    if value == 0:
        return "0"
    text = format(value.normalize(), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text
