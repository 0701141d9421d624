"""Semantic publishing of rTMS dose records as a FAIR knowledge graph."""

__version__ = "0.1.0"

from .store import Statement, Store
from .terms import EntityKind, Iri, Literal

__all__ = ["EntityKind", "Iri", "Literal", "Statement", "Store", "__version__"]
