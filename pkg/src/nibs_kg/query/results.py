from __future__ import annotations

import csv
import io
import json

from ..terms import Iri, Term
from .model import ResultTable


def term_to_json(term: Term) -> dict:
    if isinstance(term, Iri):
        return {"type": "iri", "value": term.value}
    out = {"type": "literal", "value": term.lexical, "datatype": term.datatype_iri}
    if term.lang is not None:
        out["lang"] = term.lang
    return out


def result_to_dict(table: ResultTable) -> dict:
    return {
        "vars": list(table.header),
        "rows": [{v: term_to_json(row[v]) for v in table.header} for row in table.rows],
    }


def result_to_json(table: ResultTable) -> str:
    return json.dumps(result_to_dict(table), ensure_ascii=False, indent=2) + "\n"


def result_to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([row[v].value if isinstance(row[v], Iri) else row[v].lexical for v in table.header])
    return buf.getvalue()
