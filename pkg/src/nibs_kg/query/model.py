from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from ..terms import Iri, Literal, Term

VAR_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
OPERATORS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not VAR_NAME.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    def __str__(self) -> str:
        return f"?{self.name}"


Slot = Union[Var, Iri, Literal]


@dataclass(frozen=True)
class TriplePattern:
    s: Slot
    p: Slot
    o: Slot

    def slots(self) -> tuple[Slot, Slot, Slot]:
        return (self.s, self.p, self.o)

    def variables(self) -> list[str]:
        return [x.name for x in self.slots() if isinstance(x, Var)]


@dataclass(frozen=True)
class Filter:
    left: Slot
    op: str
    right: Slot

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")

    def variables(self) -> list[str]:
        return [x.name for x in (self.left, self.right) if isinstance(x, Var)]


@dataclass
class SelectQuery:
    patterns: list[TriplePattern]
    projection: Optional[list[str]] = None  # None means SELECT *
    filters: list[Filter] = field(default_factory=list)
    distinct: bool = False
    order_by: Optional[tuple[str, bool]] = None  # (variable, ascending)
    limit: Optional[int] = None
    prefixes: dict[str, str] = field(default_factory=dict)

    def pattern_variables(self) -> list[str]:
        seen: dict[str, None] = {}
        for pattern in self.patterns:
            for name in pattern.variables():
                seen.setdefault(name)
        return list(seen)

    def header(self) -> list[str]:
        return list(self.projection) if self.projection is not None else self.pattern_variables()


@dataclass
class ResultTable:
    header: list[str]
    rows: list[dict[str, Term]]

    def tuples(self) -> list[tuple]:
        return [tuple(row[v] for v in self.header) for row in self.rows]
