"""Brute-force reference evaluator used to check the engine.

Deliberately naive: patterns are matched in the order written by scanning
every statement, and term comparison and row ordering are re-derived here
rather than shared with the engine.
"""

from __future__ import annotations

import functools
from decimal import Decimal

from ..errors import TypeMismatch
from ..store import Store
from ..terms import Iri
from .model import ResultTable, SelectQuery, Var
from .parser import parse_query


def _kind(t):
    if isinstance(t, Iri):
        return 0
    if t.datatype in ("integer", "decimal"):
        return 1
    if t.datatype == "string":
        return 2
    return 3


def _value(t):
    k = _kind(t)
    if k == 0:
        return t.value
    if k == 1:
        return Decimal(t.lexical)
    if k == 3:
        return t.lexical in ("1", "true")
    return t.lexical


def _holds(a, op, b) -> bool:
    if _kind(a) != _kind(b):
        if op in ("=", "!="):
            return op == "!="
        raise TypeMismatch("ordering comparison between incompatible terms")
    if _kind(a) == 2:
        if op in ("=", "!="):
            same = a.lexical == b.lexical and a.lang == b.lang
            return same if op == "=" else not same
        x, y = (a.lexical, a.lang or ""), (b.lexical, b.lang or "")
    else:
        x, y = _value(a), _value(b)
    return {
        "=": x == y,
        "!=": x != y,
        "<": x < y,
        "<=": x <= y,
        ">": x > y,
        ">=": x >= y,
    }[op]


def _cmp_terms(a, b) -> int:
    ka, kb = min(_kind(a), 2), min(_kind(b), 2)
    if ka == 2 and _kind(a) != _kind(b) and {_kind(a), _kind(b)} <= {2, 3}:
        # strings before booleans
        return -1 if _kind(a) == 2 else 1
    if ka != kb:
        return -1 if ka < kb else 1
    if ka == 1:
        va, vb = Decimal(a.lexical), Decimal(b.lexical)
        if va != vb:
            return -1 if va < vb else 1
        fa, fb = (a.lexical, a.datatype), (b.lexical, b.datatype)
        return (fa > fb) - (fa < fb)
    if ka == 0:
        return (a.value > b.value) - (a.value < b.value)
    fa = (a.lexical, a.lang or "", a.datatype)
    fb = (b.lexical, b.lang or "", b.datatype)
    return (fa > fb) - (fa < fb)


def oracle_execute(store: Store, query: SelectQuery | str) -> ResultTable:
    if isinstance(query, str):
        query = parse_query(query)
    everything = [st.triple for st in store.statements()]

    def join(i, binding):
        if i == len(query.patterns):
            yield binding
            return
        pattern = query.patterns[i]
        for triple in everything:
            candidate = dict(binding)
            consistent = True
            for slot, value in zip(pattern.slots(), triple):
                if isinstance(slot, Var):
                    if slot.name in candidate and candidate[slot.name] != value:
                        consistent = False
                        break
                    candidate[slot.name] = value
                elif slot != value:
                    consistent = False
                    break
            if consistent:
                yield from join(i + 1, candidate)

    def resolve(x, b):
        return b[x.name] if isinstance(x, Var) else x

    solutions = []
    for b in join(0, {}):
        if all(_holds(resolve(f.left, b), f.op, resolve(f.right, b)) for f in query.filters):
            solutions.append(b)

    if query.projection is not None:
        header = list(query.projection)
    else:
        header = []
        for pattern in query.patterns:
            for slot in pattern.slots():
                if isinstance(slot, Var) and slot.name not in header:
                    header.append(slot.name)

    def row_cmp(x, y):
        if query.order_by is not None:
            var, ascending = query.order_by
            c = _cmp_terms(x[var], y[var])
            if c:
                return c if ascending else -c
        for v in header:
            c = _cmp_terms(x[v], y[v])
            if c:
                return c
        return 0

    solutions.sort(key=functools.cmp_to_key(row_cmp))
    rows = []
    for b in solutions:
        row = {v: b[v] for v in header}
        if query.distinct and row in rows:
            continue
        rows.append(row)
    if query.limit is not None:
        rows = rows[: query.limit]
    return ResultTable(header, rows)
