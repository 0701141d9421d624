"""Index-driven evaluation of SELECT queries.

Patterns are joined most-selective-first; filters run on complete
solutions; rows are then ordered, projected, deduplicated and truncated.
Rows are always emitted in a canonical order (the ORDER BY key first, then
the projected values), which makes LIMIT deterministic without ORDER BY.
"""

from __future__ import annotations

from typing import Iterator

from ..errors import TypeMismatch
from ..store import Store
from ..terms import Iri, Literal, Term
from .model import Filter, ResultTable, SelectQuery, TriplePattern, Var
from .parser import parse_query

Binding = dict[str, Term]


def _category(term: Term) -> str:
    if isinstance(term, Iri):
        return "iri"
    if term.is_numeric:
        return "numeric"
    return term.datatype  # "string" or "boolean"


def _bool_value(lit: Literal) -> bool:
    return lit.lexical in ("true", "1")


def compare_terms(left: Term, op: str, right: Term) -> bool:
    """Filter comparison.

    Equality across categories (IRI, numeric, string, boolean) is false;
    ordering across categories raises TypeMismatch. Numerics compare by
    value, IRIs and strings by code point.
    """
    lc, rc = _category(left), _category(right)
    if lc != rc:
        if op == "=":
            return False
        if op == "!=":
            return True
        raise TypeMismatch(f"cannot order {lc} {_show(left)} against {rc} {_show(right)}")
    if lc == "iri":
        a, b = left.value, right.value
    elif lc == "numeric":
        a, b = left.numeric_value(), right.numeric_value()
    elif lc == "boolean":
        a, b = _bool_value(left), _bool_value(right)
    else:
        if op in ("=", "!="):
            a, b = (left.lexical, left.lang), (right.lexical, right.lang)
        else:
            a, b = (left.lexical, left.lang or ""), (right.lexical, right.lang or "")
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _show(term: Term) -> str:
    return f"<{term.value}>" if isinstance(term, Iri) else repr(term.lexical)


def sort_key(term: Term) -> tuple:
    """Total order: IRIs first (code point), then numerics by value, then other literals."""
    if isinstance(term, Iri):
        return (0, term.value)
    if term.is_numeric:
        return (1, 0, term.numeric_value(), term.lexical, term.datatype)
    return (1, 1 if term.datatype == "string" else 2, term.lexical, term.lang or "", term.datatype)


def finalize(query: SelectQuery, solutions: list[Binding]) -> ResultTable:
    """Apply ORDER BY, projection, DISTINCT and LIMIT to filtered solutions."""
    header = query.header()
    solutions = sorted(solutions, key=lambda b: tuple(sort_key(b[v]) for v in header))
    if query.order_by is not None:
        var, ascending = query.order_by
        solutions.sort(key=lambda b: sort_key(b[var]), reverse=not ascending)
    rows = [{v: b[v] for v in header} for b in solutions]
    if query.distinct:
        seen, unique = set(), []
        for row in rows:
            key = tuple(row[v] for v in header)
            if key not in seen:
                seen.add(key)
                unique.append(row)
        rows = unique
    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(header, rows)


def _resolve(slot, binding: Binding):
    if isinstance(slot, Var):
        return binding.get(slot.name)
    return slot


def _estimate(store: Store, pattern: TriplePattern, bound: set[str]) -> tuple:
    consts = [None if isinstance(x, Var) else x for x in pattern.slots()]
    if any(isinstance(c, Literal) for c in consts[:2]):
        return (0, 0)
    n_bound_vars = sum(1 for v in pattern.variables() if v in bound)
    return (store.count_matching(*consts), -n_bound_vars)


def plan(store: Store, patterns: list[TriplePattern]) -> list[TriplePattern]:
    """Greedy join order: cheapest pattern first, then prefer patterns sharing bound variables."""
    remaining = list(patterns)
    ordered: list[TriplePattern] = []
    bound: set[str] = set()
    while remaining:
        connected = [p for p in remaining if bound & set(p.variables())] if bound else []
        pool = connected or remaining
        best = min(pool, key=lambda p: _estimate(store, p, bound))
        remaining.remove(best)
        ordered.append(best)
        bound |= set(best.variables())
    return ordered


def _extend(store: Store, pattern: TriplePattern, binding: Binding) -> Iterator[Binding]:
    s, p, o = (_resolve(x, binding) for x in pattern.slots())
    if isinstance(s, Literal) or isinstance(p, Literal):
        return
    for st in store.statements_matching(s, p, o):
        new = dict(binding)
        ok = True
        for slot, value in zip(pattern.slots(), st.triple):
            if isinstance(slot, Var):
                prior = new.get(slot.name)
                if prior is None:
                    new[slot.name] = value
                elif prior != value:
                    ok = False
                    break
        if ok:
            yield new


def evaluate_bgp(store: Store, patterns: list[TriplePattern]) -> list[Binding]:
    solutions: list[Binding] = [{}]
    for pattern in plan(store, patterns):
        solutions = [ext for b in solutions for ext in _extend(store, pattern, b)]
        if not solutions:
            break
    return solutions


def _passes(f: Filter, binding: Binding) -> bool:
    return compare_terms(_resolve(f.left, binding), f.op, _resolve(f.right, binding))


def execute(store: Store, query: SelectQuery | str) -> ResultTable:
    if isinstance(query, str):
        query = parse_query(query)
    with store.lock.read():
        solutions = evaluate_bgp(store, query.patterns)
    solutions = [b for b in solutions if all(_passes(f, b) for f in query.filters)]
    return finalize(query, solutions)
