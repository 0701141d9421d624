"""Random stores, random queries and mutation harnesses shared by the tests."""

from __future__ import annotations

import random
from collections import Counter
from typing import Optional

from nibs_kg.query import Filter, SelectQuery, TriplePattern, Var, execute
from nibs_kg.store import Store
from nibs_kg.terms import EntityKind, Iri, Literal

NS = "http://kg.test"

# Characters that stress N-Triples escaping.
NASTY = ['"', "\\", "\n", "\r", "\t", "\x00", "\x01", "\x1f", "\x7f", "\x85", "é", "ß", "中", "😀", " ",
         " ", "<", ">", "#", ".", "'", "^^", "@en", "\\u0041", "\\n"]


def nasty_text(rng: random.Random, max_len: int = 12) -> str:
    parts = []
    for _ in range(rng.randint(0, max_len)):
        if rng.random() < 0.5:
            parts.append(rng.choice(NASTY))
        else:
            parts.append(chr(rng.randint(0x20, 0x7E)))
    return "".join(parts)


def nasty_label(rng: random.Random) -> str:
    text = "".join(ch for ch in nasty_text(rng) if ch.isprintable() and ch not in "\x85 ")
    return text if text.strip() else "x" + text


def random_literal(rng: random.Random) -> Literal:
    roll = rng.random()
    if roll < 0.45:
        return Literal(nasty_text(rng))
    if roll < 0.55:
        return Literal(nasty_text(rng), lang=rng.choice(["en", "de", "en-GB", "x-private1"]))
    if roll < 0.7:
        return Literal(str(rng.randint(-10**6, 10**6)), "integer")
    if roll < 0.9:
        return Literal(f"{rng.uniform(-1000, 1000):.{rng.randint(0, 4)}f}", "decimal")
    return Literal(rng.choice(["true", "false", "1", "0"]), "boolean")


def random_store(rng: random.Random, n_triples: int) -> Store:
    """Store with roughly ``n_triples`` statements and escape-heavy literals and labels."""
    store = Store(NS)
    n_res = max(2, n_triples // 8)
    resources = [store.mint_entity(EntityKind.RESOURCE, nasty_label(rng)) for _ in range(n_res)]
    props = [store.mint_entity(EntityKind.PROPERTY, nasty_label(rng)) for _ in range(rng.randint(1, 12))]
    for _ in range(rng.randint(0, 3)):
        store.mint_entity(EntityKind.CLASS, nasty_label(rng))
    externals = [store.register_external(f"http://ext.example/{rng.randint(0, 10**6)}#x", EntityKind.RESOURCE)]
    attempts = 0
    while len(store) < n_triples and attempts < n_triples * 3:
        attempts += 1
        s = rng.choice(resources)
        p = rng.choice(props)
        o = rng.choice(resources + externals) if rng.random() < 0.4 else random_literal(rng)
        store.add_statement(s, p, o)
    return store


# -- query workload ----------------------------------------------------


def query_store(rng: random.Random, n_triples: int) -> Store:
    """Store with small value domains so that joins and filters hit often."""
    store = Store(NS)
    n_res = max(5, n_triples // 10)
    resources = [store.mint_entity(EntityKind.RESOURCE, f"r{i}") for i in range(n_res)]
    props = [store.mint_entity(EntityKind.PROPERTY, f"p{i}") for i in range(rng.randint(2, 8))]
    lits = (
        [Literal(str(i), "integer") for i in range(-5, 30)]
        + [Literal(f"{i / 4}", "decimal") for i in range(0, 40)]
        + [Literal(w) for w in ["F8", "R", "D", "F8-D", "alpha", "Beta", "é", ""]]
        + [Literal("F8", lang="en"), Literal("true", "boolean"), Literal("0", "boolean")]
    )
    attempts = 0
    while len(store) < n_triples and attempts < n_triples * 3:
        attempts += 1
        o = rng.choice(resources) if rng.random() < 0.45 else rng.choice(lits)
        store.add_statement(rng.choice(resources), rng.choice(props), o)
    return store


def _pattern_from(rng, triple, var_names, bound_vars) -> TriplePattern:
    slots = []
    for pos, value in enumerate(triple):
        roll = rng.random()
        if bound_vars and roll < 0.35 and pos != 1 or (bound_vars and pos == 1 and roll < 0.1):
            slots.append(Var(rng.choice(bound_vars)))
        elif roll < 0.75:
            slots.append(Var(rng.choice(var_names)))
        else:
            slots.append(value)
    if all(isinstance(x, Var) for x in slots) and not bound_vars:
        slots[1] = triple[1]
    return TriplePattern(*slots)


def random_query(rng: random.Random, store: Store, max_cost: int = 1_500_000) -> SelectQuery:
    """A random SELECT (≤3 patterns, ≤2 filters) whose brute-force evaluation stays affordable."""
    statements = store.statements()
    n = len(statements)
    while True:
        names = ["a", "b", "c", "d", "e"][: rng.randint(2, 5)]
        patterns: list[TriplePattern] = []
        for _ in range(rng.randint(1, 3)):
            bound = sorted({v for p in patterns for v in p.variables()})
            triple = rng.choice(statements).triple if statements else (Iri(NS + "/x"), Iri(NS + "/y"), Iri(NS + "/z"))
            patterns.append(_pattern_from(rng, triple, names, bound))
        variables = list(dict.fromkeys(v for p in patterns for v in p.variables()))
        if not variables:
            continue
        filters = []
        for _ in range(rng.randint(0, 2)):
            left = Var(rng.choice(variables))
            op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
            if rng.random() < 0.3:
                right = Var(rng.choice(variables))
            else:
                right = rng.choice(statements).object if statements else Literal("1", "integer")
                if rng.random() < 0.3:
                    right = Literal(str(rng.randint(-5, 30)), "integer")
            filters.append(Filter(left, op, right))
        projection: Optional[list[str]] = None
        if rng.random() < 0.7:
            projection = rng.sample(variables, rng.randint(1, len(variables)))
        order_by = None
        if rng.random() < 0.5:
            order_by = (rng.choice(variables), rng.random() < 0.5)
        limit = rng.choice([None, None, 0, 1, 3, 10, 50])
        query = SelectQuery(patterns, projection, filters, rng.random() < 0.4, order_by, limit)
        # brute force costs about n statements per partial solution at each level
        cost = n
        for depth in range(1, len(patterns)):
            partial = execute(store, SelectQuery(patterns[:depth]))
            cost += n * len(partial.rows)
        if cost <= max_cost:
            return query


def multiset(table) -> Counter:
    return Counter(table.tuples())


# -- mutation harness --------------------------------------------------

OOV_TOKEN = "zz-not-a-vocabulary-term"
NON_NUMERIC = "not-a-number"


def mutable_fields(store: Store, contribution: Iri, template) -> list[tuple]:
    """(shape, kind) pairs that can be mutated on a conforming contribution."""
    out = []
    for shape in template.flat_shapes():
        values = [st.object for st in store.statements_matching(contribution, shape.property)]
        if not values:
            continue
        if shape.required:
            out.append((shape, "delete"))
        elif shape.controlled:
            out.append((shape, "oov"))
        elif shape.range == "decimal":
            out.append((shape, "non-numeric"))
    return out


EXPECTED_CODE = {"delete": "MissingRequired", "oov": "NotInVocabulary", "non-numeric": "WrongDatatype"}


def mutate_contribution(store: Store, contribution: Iri, fields: list[tuple]) -> Counter:
    """Apply graph-level mutations; returns the multiset of expected violation codes."""
    expected = Counter()
    for shape, kind in fields:
        for st in store.statements_matching(contribution, shape.property):
            store.remove_statement(*st.triple)
        if kind == "oov":
            store.add_statement(contribution, shape.property, Literal(OOV_TOKEN))
        elif kind == "non-numeric":
            store.add_statement(contribution, shape.property, Literal(NON_NUMERIC))
        expected[EXPECTED_CODE[kind]] += 1
    return expected


def mutate_record(record, rng: random.Random):
    """Record-level mutation for ingestion tests: one field becomes invalid."""
    from copy import deepcopy

    record = deepcopy(record)
    choice = rng.choice(["delete", "oov", "non-numeric"])
    if choice == "delete":
        record.values.pop("Type of rTMS", None)
    elif choice == "oov":
        record.values["Coil Shape"] = [OOV_TOKEN]
    else:
        record.values["Coil Size"] = [NON_NUMERIC]
    return record, EXPECTED_CODE[choice]
