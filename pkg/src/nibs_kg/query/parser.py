"""Parser for the supported SELECT subset.

    PREFIX p: <iri>
    SELECT [DISTINCT] (?v ... | *) [WHERE] { pattern ('.' pattern)* (FILTER(?v op term))* }
    [ORDER BY [ASC|DESC](?v)] [LIMIT n]
"""

from __future__ import annotations

import re
from typing import Optional

from ..errors import InvalidIri, InvalidLiteral, QuerySyntaxError, UnboundVariable, UnknownPrefix
from ..terms import RDF_TYPE, XSD, Iri, Literal
from .model import OPERATORS, Filter, SelectQuery, TriplePattern, Var

KEYWORDS = {"PREFIX", "SELECT", "DISTINCT", "WHERE", "FILTER", "ORDER", "BY", "ASC", "DESC", "LIMIT"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n\r]|\\.)*")
  | (?P<lang>@[A-Za-z]+(?:-[A-Za-z0-9]+)*)
  | (?P<dtype>\^\^)
  | (?P<number>[+-]?(?:[0-9]*\.[0-9]+|[0-9]+))
  | (?P<op>!=|<=|>=|=|<|>)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)?)
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
  | (?P<punct>[{}().*,])
    """,
    re.VERBOSE,
)
_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind, self.text, self.pos = kind, text, pos

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.pos})"


def tokenize(text: str) -> list[Token]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QuerySyntaxError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _unescape(body: str, pos: int) -> str:
    out, i = [], 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            digits = body[i + 2 : i + 2 + width]
            if len(digits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
                raise QuerySyntaxError(pos + i, "malformed \\u escape")
            out.append(chr(int(digits, 16)))
            i += 2 + width
        else:
            raise QuerySyntaxError(pos + i, f"invalid escape \\{nxt}")
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.prefixes: dict[str, str] = {}

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_kw(self, word: str) -> bool:
        return self.tok.kind == "word" and self.tok.text.upper() == word

    def expect_kw(self, word: str) -> None:
        if not self.is_kw(word):
            raise QuerySyntaxError(self.tok.pos, f"expected {word}, found {self.tok.text or 'end of input'!r}")
        self.advance()

    def expect_punct(self, ch: str) -> None:
        if self.tok.kind != "punct" or self.tok.text != ch:
            raise QuerySyntaxError(self.tok.pos, f"expected {ch!r}, found {self.tok.text or 'end of input'!r}")
        self.advance()

    def is_punct(self, ch: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == ch

    # -- terms

    def iri_token(self, tok: Token) -> Iri:
        if tok.kind == "iri":
            try:
                return Iri(tok.text[1:-1])
            except InvalidIri:
                raise QuerySyntaxError(tok.pos, f"not an absolute IRI: {tok.text}") from None
        prefix, _, local = tok.text.partition(":")
        if prefix not in self.prefixes:
            raise UnknownPrefix(f"prefix {prefix + ':'!r} is not declared (position {tok.pos})")
        try:
            return Iri(self.prefixes[prefix] + local)
        except InvalidIri:
            raise QuerySyntaxError(tok.pos, f"{tok.text} does not expand to an absolute IRI") from None

    def literal(self) -> Literal:
        tok = self.advance()
        try:
            if tok.kind == "number":
                return Literal(tok.text, "decimal" if "." in tok.text else "integer")
            if tok.kind == "word" and tok.text in ("true", "false"):
                return Literal(tok.text, "boolean")
            lexical = _unescape(tok.text[1:-1], tok.pos + 1)
            if self.tok.kind == "lang":
                return Literal(lexical, "string", self.advance().text[1:])
            if self.tok.kind == "dtype":
                self.advance()
                dt_tok = self.advance()
                if dt_tok.kind not in ("iri", "pname"):
                    raise QuerySyntaxError(dt_tok.pos, "expected datatype IRI after '^^'")
                dt = self.iri_token(dt_tok).value
                if not dt.startswith(XSD) or dt[len(XSD):] not in ("string", "integer", "decimal", "boolean"):
                    raise QuerySyntaxError(dt_tok.pos, f"unsupported datatype <{dt}>")
                return Literal(lexical, dt[len(XSD):])
            return Literal(lexical)
        except InvalidLiteral as exc:
            raise QuerySyntaxError(tok.pos, str(exc)) from None

    def slot(self, position: str):
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            return Var(tok.text[1:])
        if tok.kind in ("iri", "pname"):
            self.advance()
            return self.iri_token(tok)
        if position == "p" and tok.kind == "word" and tok.text == "a":
            self.advance()
            return Iri(RDF_TYPE)
        if position in ("o", "filter") and (
            tok.kind in ("string", "number") or (tok.kind == "word" and tok.text in ("true", "false"))
        ):
            return self.literal()
        what = {"s": "subject", "p": "predicate", "o": "object", "filter": "filter operand"}[position]
        raise QuerySyntaxError(tok.pos, f"expected {what}, found {tok.text or 'end of input'!r}")

    # -- clauses

    def parse(self) -> SelectQuery:
        while self.is_kw("PREFIX"):
            self.advance()
            tok = self.advance()
            if tok.kind != "pname" or not tok.text.endswith(":"):
                raise QuerySyntaxError(tok.pos, "expected prefix name such as 'ex:'")
            iri = self.advance()
            if iri.kind != "iri":
                raise QuerySyntaxError(iri.pos, "expected <namespace IRI> after prefix name")
            self.prefixes[tok.text[:-1]] = iri.text[1:-1]

        self.expect_kw("SELECT")
        distinct = False
        if self.is_kw("DISTINCT"):
            self.advance()
            distinct = True
        projection: Optional[list[str]] = []
        if self.is_punct("*"):
            self.advance()
            projection = None
        else:
            while self.tok.kind == "var":
                projection.append(self.advance().text[1:])
            if not projection:
                raise QuerySyntaxError(self.tok.pos, "expected '*' or at least one variable after SELECT")
        if self.is_kw("WHERE"):
            self.advance()
        self.expect_punct("{")

        patterns, filters = [], []
        while not self.is_punct("}"):
            if self.tok.kind == "eof":
                raise QuerySyntaxError(self.tok.pos, "unterminated group pattern, expected '}'")
            if self.is_kw("FILTER"):
                self.advance()
                self.expect_punct("(")
                left = self.slot("filter")
                op_tok = self.advance()
                if op_tok.kind != "op" or op_tok.text not in OPERATORS:
                    raise QuerySyntaxError(op_tok.pos, f"expected comparison operator, found {op_tok.text!r}")
                right = self.slot("filter")
                self.expect_punct(")")
                filters.append(Filter(left, op_tok.text, right))
                if self.is_punct("."):
                    self.advance()
                continue
            s, p, o = self.slot("s"), self.slot("p"), self.slot("o")
            patterns.append(TriplePattern(s, p, o))
            if self.is_punct("."):
                self.advance()
            elif not (self.is_punct("}") or self.is_kw("FILTER")):
                raise QuerySyntaxError(self.tok.pos, f"expected '.' or '}}', found {self.tok.text!r}")
        self.expect_punct("}")

        order_by = None
        if self.is_kw("ORDER"):
            self.advance()
            self.expect_kw("BY")
            ascending = True
            if self.is_kw("ASC") or self.is_kw("DESC"):
                ascending = self.advance().text.upper() == "ASC"
                self.expect_punct("(")
                var = self.advance()
                if var.kind != "var":
                    raise QuerySyntaxError(var.pos, "expected variable in ORDER BY")
                self.expect_punct(")")
            else:
                had_paren = self.is_punct("(")
                if had_paren:
                    self.advance()
                var = self.advance()
                if var.kind != "var":
                    raise QuerySyntaxError(var.pos, "expected variable in ORDER BY")
                if had_paren:
                    self.expect_punct(")")
            order_by = (var.text[1:], ascending)

        limit = None
        if self.is_kw("LIMIT"):
            self.advance()
            tok = self.advance()
            if tok.kind != "number" or not tok.text.isdigit():
                raise QuerySyntaxError(tok.pos, "LIMIT expects a non-negative integer")
            limit = int(tok.text)

        if self.tok.kind != "eof":
            raise QuerySyntaxError(self.tok.pos, f"unexpected trailing input {self.tok.text!r}")

        query = SelectQuery(patterns, projection, filters, distinct, order_by, limit, dict(self.prefixes))
        bound = set(query.pattern_variables())
        used = list(projection or [])
        for f in filters:
            used.extend(f.variables())
        if order_by:
            used.append(order_by[0])
        for name in used:
            if name not in bound:
                raise UnboundVariable(f"?{name} does not appear in any triple pattern")
        return query


def parse_query(text: str) -> SelectQuery:
    return _Parser(text).parse()
