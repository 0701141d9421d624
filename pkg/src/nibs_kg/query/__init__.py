"""Conjunctive SELECT queries over a store."""

from .engine import compare_terms, execute, sort_key
from .model import Filter, ResultTable, SelectQuery, TriplePattern, Var
from .oracle import oracle_execute
from .parser import parse_query
from .results import result_to_csv, result_to_dict, result_to_json

__all__ = [
    "Filter",
    "ResultTable",
    "SelectQuery",
    "TriplePattern",
    "Var",
    "compare_terms",
    "execute",
    "oracle_execute",
    "parse_query",
    "result_to_csv",
    "result_to_dict",
    "result_to_json",
    "sort_key",
]
