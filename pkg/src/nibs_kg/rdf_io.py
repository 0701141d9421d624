"""N-Triples serializer/parser, Turtle emitter and snapshot persistence."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union
from urllib.parse import unquote

from .errors import DanglingReference, InvalidIri, InvalidLiteral, KgError, ParseError
from .store import LOCAL_ID, Store
from .terms import (
    OWL_SAME_AS,
    RDF_TYPE,
    RDFS_LABEL,
    XSD,
    EntityKind,
    Iri,
    Literal,
    Term,
)

_PN_PREFIX = re.compile(r"^([A-Za-z][A-Za-z0-9_.\-]*[A-Za-z0-9_\-]|[A-Za-z])?$")
_PN_LOCAL = re.compile(r"^[A-Za-z0-9_]([A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?$")
_ECHAR = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPE = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f", "'": "'"}
_LANG = re.compile(r"[A-Za-z]+(-[A-Za-z0-9]+)*")
_IRI_FAST = re.compile(r'<([^\x00-\x20<>"{}|^`\\]*)>')
_STRING_FAST = re.compile(r'"([^"\\\n\r]*)"')

Triple = tuple[Iri, Iri, Term]


@dataclass
class SerializationOptions:
    format: str = "ntriples"
    prefix_map: dict[str, str] = field(default_factory=dict)
    sort: bool = True

    def __post_init__(self):
        if self.format not in ("ntriples", "turtle"):
            raise ValueError(f"unknown format {self.format!r}")
        for name in self.prefix_map:
            if not _PN_PREFIX.match(name):
                raise ValueError(f"invalid prefix name {name!r}")


# -- encoding ----------------------------------------------------------


def escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ECHAR:
            out.append(_ECHAR[ch])
        elif ch < " " or "\x7f" <= ch <= "\x9f" or "\ud800" <= ch <= "\udfff":
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def encode_literal(lit: Literal) -> str:
    body = f'"{escape_string(lit.lexical)}"'
    if lit.lang is not None:
        return f"{body}@{lit.lang}"
    return f"{body}^^<{lit.datatype_iri}>"


def encode_term(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    return encode_literal(term)


def ntriples_line(triple: Triple) -> str:
    s, p, o = triple
    return f"<{s.value}> <{p.value}> {encode_term(o)} ."


def serialize_triples(triples: Iterable[Triple], sort: bool = True) -> str:
    lines = [ntriples_line(t) for t in triples]
    if sort:
        # code-point order on str equals byte order on the UTF-8 encoding
        lines = sorted(set(lines))
    else:
        lines = list(dict.fromkeys(lines))
    return "".join(line + "\n" for line in lines)


def serialize(store: Store, opts: Optional[SerializationOptions] = None) -> str:
    opts = opts or SerializationOptions()
    triples = store.export_triples()
    if opts.format == "turtle":
        return serialize_turtle(triples, opts.prefix_map or default_prefixes(store), sort=opts.sort)
    return serialize_triples(triples, sort=opts.sort)


def default_prefixes(store: Store) -> dict[str, str]:
    ns = store.namespace
    return {
        "res": f"{ns}/resource/",
        "prop": f"{ns}/property/",
        "cls": f"{ns}/class/",
        "tpl": f"{ns}/template/",
        "rdf": RDF_TYPE.rsplit("#", 1)[0] + "#",
        "rdfs": RDFS_LABEL.rsplit("#", 1)[0] + "#",
        "owl": OWL_SAME_AS.rsplit("#", 1)[0] + "#",
        "xsd": XSD,
    }


def _turtle_iri(iri: str, prefixes: list[tuple[str, str]]) -> str:
    for name, ns in prefixes:
        if iri.startswith(ns) and _PN_LOCAL.match(iri[len(ns):]):
            return f"{name}:{iri[len(ns):]}"
    return f"<{iri}>"


def _turtle_object(term: Term, prefixes) -> str:
    if isinstance(term, Iri):
        return _turtle_iri(term.value, prefixes)
    body = f'"{escape_string(term.lexical)}"'
    if term.lang is not None:
        return f"{body}@{term.lang}"
    if term.datatype == "string":
        return body
    return f"{body}^^{_turtle_iri(term.datatype_iri, prefixes)}"


def serialize_turtle(triples: Iterable[Triple], prefix_map: dict[str, str], sort: bool = True) -> str:
    # longest namespace first so the most specific prefix wins
    prefixes = sorted(prefix_map.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    grouped: dict[Iri, dict[Iri, list[Term]]] = {}
    for s, p, o in dict.fromkeys(triples):
        grouped.setdefault(s, {}).setdefault(p, []).append(o)
    if not grouped:
        return ""
    lines = [f"@prefix {name}: <{ns}> ." for name, ns in sorted(prefix_map.items())]
    lines.append("")
    subjects = sorted(grouped, key=lambda i: i.value) if sort else list(grouped)
    for subject in subjects:
        preds = grouped[subject]
        keys = sorted(preds, key=lambda i: i.value) if sort else list(preds)
        parts = []
        for pred in keys:
            objs = [_turtle_object(o, prefixes) for o in preds[pred]]
            if sort:
                objs.sort()
            verb = "a" if pred.value == RDF_TYPE else _turtle_iri(pred.value, prefixes)
            parts.append(f"{verb} {', '.join(objs)}")
        lines.append(f"{_turtle_iri(subject.value, prefixes)} " + " ;\n    ".join(parts) + " .")
    return "\n".join(lines) + "\n"


# -- parsing -----------------------------------------------------------


class _LineParser:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def fail(self, reason: str):
        raise ParseError(self.lineno, self.pos + 1, reason)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text) or self.text[self.pos] == "#"

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def iri(self, role: str) -> Iri:
        if self.peek() == "_":
            self.fail(f"blank node {role} is not supported")
        if self.peek() != "<":
            self.fail(f"expected IRI for {role}")
        start = self.pos
        fast = _IRI_FAST.match(self.text, self.pos)
        if fast:
            self.pos = fast.end()
            try:
                return Iri(fast.group(1))
            except InvalidIri:
                self.pos = start
                self.fail(f"not an absolute IRI: {fast.group(0)}")
        self.pos += 1
        out = []
        while True:
            ch = self.peek()
            if ch == "":
                self.fail("unterminated IRI")
            if ch == ">":
                self.pos += 1
                break
            if ch == "\\":
                out.append(self._uchar())
                continue
            if ch in ' <"{}|^`' or ch < " ":
                self.fail(f"character {ch!r} not allowed in IRI")
            out.append(ch)
            self.pos += 1
        value = "".join(out)
        try:
            return Iri(value)
        except InvalidIri:
            self.pos = start
            self.fail(f"not an absolute IRI: <{value}>")

    def _uchar(self) -> str:
        kind = self.text[self.pos + 1 : self.pos + 2]
        width = {"u": 4, "U": 8}.get(kind)
        if width is None:
            self.fail("invalid escape in IRI")
        digits = self.text[self.pos + 2 : self.pos + 2 + width]
        if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
            self.fail("malformed \\u escape")
        code = int(digits, 16)
        if code > 0x10FFFF:
            self.fail("escape outside the Unicode range")
        self.pos += 2 + width
        return chr(code)

    def literal(self) -> Literal:
        start = self.pos
        fast = _STRING_FAST.match(self.text, self.pos)
        if fast:
            self.pos = fast.end()
            return self._literal_tail(start, fast.group(1))
        self.pos += 1
        out = []
        while True:
            ch = self.peek()
            if ch == "":
                self.fail("unterminated string literal")
            if ch == '"':
                self.pos += 1
                break
            if ch == "\\":
                nxt = self.text[self.pos + 1 : self.pos + 2]
                if nxt in ("u", "U"):
                    out.append(self._uchar())
                    continue
                if nxt not in _UNESCAPE:
                    self.fail(f"invalid escape \\{nxt}")
                out.append(_UNESCAPE[nxt])
                self.pos += 2
                continue
            if ch in "\n\r":
                self.fail("raw line break in literal")
            out.append(ch)
            self.pos += 1
        return self._literal_tail(start, "".join(out))

    def _literal_tail(self, start: int, lexical: str) -> Literal:
        datatype, lang = "string", None
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            dt = self.iri("datatype").value
            if dt.startswith(XSD) and dt[len(XSD):] in ("string", "integer", "decimal", "boolean"):
                datatype = dt[len(XSD):]
            else:
                self.fail(f"unsupported datatype <{dt}>")
        elif self.peek() == "@":
            self.pos += 1
            m = _LANG.match(self.text, self.pos)
            if not m:
                self.fail("malformed language tag")
            lang = m.group(0)
            self.pos = m.end()
        try:
            return Literal(lexical, datatype, lang)
        except InvalidLiteral as exc:
            self.pos = start
            self.fail(str(exc))

    def triple(self) -> Triple:
        s = self.iri("subject")
        self.skip_ws()
        p = self.iri("predicate")
        self.skip_ws()
        if self.peek() == '"':
            o: Term = self.literal()
        elif self.peek() == ".":
            self.fail("missing object")
        else:
            o = self.iri("object")
        self.skip_ws()
        if self.peek() != ".":
            self.fail("expected '.' after object")
        self.pos += 1
        self.skip_ws()
        if not self.at_end():
            self.fail("unexpected content after '.'")
        return (s, p, o)


def parse_ntriples(text: str) -> list[Triple]:
    triples = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        parser = _LineParser(line, lineno)
        parser.skip_ws()
        if parser.at_end():
            continue
        triples.append(parser.triple())
    return triples


# -- snapshots ---------------------------------------------------------

REGISTRY_HEADER = "#namespace"
_REG_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}


def _reg_escape(text: str) -> str:
    return "".join(_REG_ESCAPES.get(ch, ch) for ch in text)


def _reg_unescape(text: str, lineno: int) -> str:
    out, i = [], 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1 : i + 2]
            mapped = {"\\": "\\", "t": "\t", "n": "\n"}.get(nxt)
            if mapped is None:
                raise ParseError(lineno, i + 1, f"invalid registry escape \\{nxt}")
            out.append(mapped)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def registry_text(store: Store) -> str:
    lines = [f"{REGISTRY_HEADER}\t{store.namespace}"]
    for e in store.entities():
        lines.append(f"{_reg_escape(e.local_id)}\t{e.kind.value}\t{_reg_escape(e.label)}")
    return "\n".join(lines) + "\n"


def save_snapshot(store: Store, base: Union[str, Path]) -> tuple[Path, Path]:
    """Write ``<base>.nt`` (statements in ordinal order) and ``<base>.reg``."""
    base = Path(base)
    nt_path, reg_path = base.with_name(base.name + ".nt"), base.with_name(base.name + ".reg")
    with store.lock.read():
        nt = serialize(store, SerializationOptions(sort=False))
        reg = registry_text(store)
    nt_path.parent.mkdir(parents=True, exist_ok=True)
    nt_path.write_text(nt, encoding="utf-8", newline="\n")
    reg_path.write_text(reg, encoding="utf-8", newline="\n")
    return nt_path, reg_path


def read_snapshot(base: Union[str, Path], namespace: Optional[str] = None) -> Store:
    base = Path(base)
    nt = base.with_name(base.name + ".nt").read_text(encoding="utf-8")
    reg = base.with_name(base.name + ".reg").read_text(encoding="utf-8")
    return load_snapshot(nt, reg, namespace=namespace)


def snapshot_exists(base: Union[str, Path]) -> bool:
    base = Path(base)
    return base.with_name(base.name + ".nt").exists() and base.with_name(base.name + ".reg").exists()


def load_snapshot(nt_text: str, registry_text: str, namespace: Optional[str] = None) -> Store:
    entries = []
    for lineno, line in enumerate(registry_text.split("\n"), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if fields[0] == REGISTRY_HEADER:
            if len(fields) != 2:
                raise ParseError(lineno, 1, "malformed namespace header")
            namespace = namespace or fields[1]
            continue
        if len(fields) != 3:
            raise ParseError(lineno, 1, f"expected 3 tab-separated fields, got {len(fields)}")
        local_id, kind_name, label = fields
        try:
            kind = EntityKind(kind_name)
        except ValueError:
            raise ParseError(lineno, len(local_id) + 2, f"unknown entity kind {kind_name!r}") from None
        entries.append((lineno, _reg_unescape(local_id, lineno), kind, _reg_unescape(label, lineno)))

    store = Store(namespace)
    for lineno, local_id, kind, label in entries:
        try:
            if LOCAL_ID.match(local_id):
                store.mint_entity(kind, label, explicit_id=local_id)
            else:
                store.register_external(unquote(local_id), kind, label)
        except KgError as exc:
            raise ParseError(lineno, 1, str(exc)) from None

    label_pred = store.label_predicate
    local_prefix = store.namespace + "/"
    for s, p, o in parse_ntriples(nt_text):
        for node in (s, p):
            if not store.has_entity(node):
                raise DanglingReference(f"{node} is used in a statement but not registered")
        if isinstance(o, Iri) and o.value.startswith(local_prefix) and not store.has_entity(o):
            raise DanglingReference(f"{o} is used in a statement but not registered")
        if p == label_pred and o == Literal(store.label(s)):
            continue
        store.add_statement(s, p, o)
    return store
