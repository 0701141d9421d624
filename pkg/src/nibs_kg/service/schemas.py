from __future__ import annotations

from typing import Literal as Lit
from typing import Optional

from pydantic import BaseModel


class TermModel(BaseModel):
    type: Lit["iri", "literal"]
    value: str
    datatype: Optional[str] = None
    lang: Optional[str] = None
    label: Optional[str] = None


class StatementModel(BaseModel):
    ordinal: int
    subject: str
    predicate: str
    predicate_label: Optional[str] = None
    object: TermModel


class LinksModel(BaseModel):
    self: str
    ntriples: str


class EntityModel(BaseModel):
    id: str
    iri: str
    kind: str
    label: str
    classes: list[str]
    statements: list[StatementModel]
    links: LinksModel


class QueryResultModel(BaseModel):
    vars: list[str]
    rows: list[dict[str, TermModel]]


class FairCheckModel(BaseModel):
    check: str
    passed: bool
    detail: str


class FairPrincipleModel(BaseModel):
    passed: bool
    evidence: list[FairCheckModel]


class FairReportModel(BaseModel):
    findable: FairPrincipleModel
    accessible: FairPrincipleModel
    interoperable: FairPrincipleModel
    reusable: FairPrincipleModel


class ErrorModel(BaseModel):
    detail: str
