"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class KgError(Exception):
    """Base class for all errors raised by nibs_kg."""


class DuplicateId(KgError):
    pass


class InvalidLabel(KgError):
    pass


class InvalidIri(KgError):
    pass


class InvalidLiteral(KgError):
    pass


class UnknownEntity(KgError):
    pass


class PredicateNotProperty(KgError):
    pass


class NotFound(KgError):
    pass


class ParseError(KgError):
    """Malformed N-Triples input, located at a 1-based line and column."""

    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class DanglingReference(KgError):
    pass


class MalformedCsv(KgError):
    def __init__(self, row: int, reason: str):
        self.row = row
        self.reason = reason
        super().__init__(f"row {row}: {reason}")


class MissingTitleColumn(KgError):
    pass


class MappingError(KgError):
    """Unreadable column-mapping file or unknown property label."""


class VocabularyNotSeeded(KgError):
    pass


class QuerySyntaxError(KgError):
    def __init__(self, position: int, reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"syntax error at position {position}: {reason}")


class UnknownPrefix(KgError):
    pass


class UnboundVariable(KgError):
    pass


class TypeMismatch(KgError):
    pass


class InvalidChunkSize(KgError):
    pass


class EmptyTable(KgError):
    pass


class BindFailure(KgError):
    pass
