"""Assertion values, patterns, and their token serialization.

Values are the data actors publish: atoms (symbols, strings, integers,
floats, booleans) and compounds (plain tuples or labeled records).
Patterns extend values with a wildcard; projection specs additionally
allow capture marks.  Every value reads as a flat token sequence in
which each compound contributes an arity-tagged push token followed by
its fields; that sequence is the key format used by the trie index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union


class Symbol:
    """An interned identifier atom, distinct from strings."""

    __slots__ = ("name",)
    _interned: dict = {}

    def __new__(cls, name: str) -> "Symbol":
        sym = cls._interned.get(name)
        if sym is None:
            sym = super().__new__(cls)
            object.__setattr__(sym, "name", name)
            cls._interned[name] = sym
        return sym

    def __setattr__(self, *_):
        raise AttributeError("Symbol is immutable")

    def __repr__(self) -> str:
        return self.name

    def __eq__(self, other) -> bool:
        return self is other or (isinstance(other, Symbol) and self.name == other.name)

    def __hash__(self) -> int:
        return hash(("symbol", self.name))

    def __lt__(self, other: "Symbol") -> bool:
        return self.name < other.name


@dataclass(frozen=True)
class Record:
    """A labeled compound value: a named constructor applied to fields."""

    label: Symbol
    fields: tuple

    def __repr__(self) -> str:
        return format_value(self)


class _Wildcard:
    __slots__ = ()

    def __repr__(self) -> str:
        return "_"


class _Capture:
    __slots__ = ()

    def __repr__(self) -> str:
        return "$"


#: Pattern element matching any single value.
WILDCARD = _Wildcard()
#: Alias used in projection specs where a position is skipped.
DISCARD = WILDCARD
#: Projection-spec element capturing the whole value at its position.
CAPTURE = _Capture()

Value = Union[bool, int, float, str, Symbol, tuple, Record]

# Reserved unary wrappers.
OBSERVE = Symbol("observe")
OUTBOUND = Symbol("outbound")
INBOUND = Symbol("inbound")
_RESERVED = (OBSERVE, OUTBOUND, INBOUND)

_ATOM_KIND_RANK = {"bool": 0, "int": 1, "float": 2, "str": 3, "symbol": 4}


class NotAValue(ValueError):
    pass


class MalformedTokens(ValueError):
    pass


def atom_kind(a) -> Optional[str]:
    if isinstance(a, bool):
        return "bool"
    if isinstance(a, int):
        return "int"
    if isinstance(a, float):
        if math.isnan(a):
            raise NotAValue("NaN is not admissible in assertions")
        return "float"
    if isinstance(a, str):
        return "str"
    if isinstance(a, Symbol):
        return "symbol"
    return None


def is_atom(v) -> bool:
    return atom_kind(v) is not None


def is_compound(v) -> bool:
    return isinstance(v, (tuple, Record))


def decompose(v) -> tuple:
    """Split a compound into (label-or-None, fields)."""
    if isinstance(v, Record):
        return v.label, v.fields
    return None, v


def wrap(ctor: Symbol, v: Value) -> Record:
    if ctor not in _RESERVED:
        raise NotAValue(f"{ctor} is not a reserved wrapper")
    return Record(ctor, (v,))


def unwrap(ctor: Symbol, v) -> Optional[Value]:
    if isinstance(v, Record) and v.label is ctor and len(v.fields) == 1:
        return v.fields[0]
    return None


def observe(v: Value) -> Record:
    return Record(OBSERVE, (v,))


def outbound(v: Value) -> Record:
    return Record(OUTBOUND, (v,))


def inbound(v: Value) -> Record:
    return Record(INBOUND, (v,))


# ---------------------------------------------------------------------------
# Tokens


@dataclass(frozen=True)
class AtomTok:
    kind: str
    payload: object

    arity = 0

    def sort_key(self):
        return (0, _ATOM_KIND_RANK[self.kind], self.payload)

    def __repr__(self) -> str:
        return format_value(self.payload)


@dataclass(frozen=True)
class PushTok:
    label: Optional[Symbol]
    arity: int

    def sort_key(self):
        label_key = (0, "") if self.label is None else (1, self.label.name)
        return (1, label_key, self.arity)

    def __repr__(self) -> str:
        if self.label is None:
            return f"⟪{self.arity}"
        return f"{self.label.name}⟪{self.arity}"


Token = Union[AtomTok, PushTok]


def token_sort_key(tok: Token):
    return tok.sort_key()


def atom_token(a) -> AtomTok:
    kind = atom_kind(a)
    if kind is None:
        raise NotAValue(f"not an atom: {a!r}")
    return AtomTok(kind, a)


def push_token(v) -> PushTok:
    label, fields = decompose(v)
    return PushTok(label, len(fields))


def serialize(v: Value) -> list:
    """Read a value as its pre-order token sequence."""
    out: list = []
    _serialize_into(v, out)
    return out


def _serialize_into(v, out: list) -> None:
    if is_atom(v):
        out.append(atom_token(v))
    elif is_compound(v):
        _, fields = decompose(v)
        out.append(push_token(v))
        for f in fields:
            _serialize_into(f, out)
    else:
        raise NotAValue(f"not serializable as an assertion value: {v!r}")


def parse(tokens: Sequence[Token], n: int) -> tuple:
    """Rebuild ``n`` values from a token sequence.

    Returns ``(values, remainder)``; raises MalformedTokens when the
    sequence does not start with an n-well-formed prefix.
    """
    values = []
    pos = 0
    for _ in range(n):
        v, pos = _parse_one(tokens, pos)
        values.append(v)
    return tuple(values), list(tokens[pos:])


def _parse_one(tokens: Sequence[Token], pos: int):
    if pos >= len(tokens):
        raise MalformedTokens("unexpected end of token sequence")
    tok = tokens[pos]
    if isinstance(tok, AtomTok):
        return tok.payload, pos + 1
    fields = []
    pos += 1
    for _ in range(tok.arity):
        f, pos = _parse_one(tokens, pos)
        fields.append(f)
    if tok.label is None:
        return tuple(fields), pos
    return Record(tok.label, tuple(fields)), pos


def parse_exact(tokens: Sequence[Token]) -> tuple:
    """Parse values until the sequence is exhausted."""
    values = []
    pos = 0
    while pos < len(tokens):
        v, pos = _parse_one(tokens, pos)
        values.append(v)
    return tuple(values)


def is_well_formed(tokens: Sequence[Token], n: int) -> bool:
    try:
        _, rest = parse(tokens, n)
    except MalformedTokens:
        return False
    return not rest


def skip_one_value(tokens: Sequence[Token], pos: int) -> int:
    """Index just past the single value starting at ``pos``."""
    need = 1
    while need:
        if pos >= len(tokens):
            raise MalformedTokens("unexpected end of token sequence")
        tok = tokens[pos]
        pos += 1
        need -= 1
        if isinstance(tok, PushTok):
            need += tok.arity
    return pos


def values_equal(a, b) -> bool:
    """Structural equality that keeps atom kinds apart (1 != 1.0 != True)."""
    ka, kb = atom_kind(a) if is_atom(a) else None, atom_kind(b) if is_atom(b) else None
    if ka or kb:
        return ka == kb and a == b
    if is_compound(a) and is_compound(b):
        la, fa = decompose(a)
        lb, fb = decompose(b)
        return la is lb and len(fa) == len(fb) and all(
            values_equal(x, y) for x, y in zip(fa, fb)
        )
    return False


# ---------------------------------------------------------------------------
# Canonical text encoding


def format_value(v) -> str:
    if v is WILDCARD:
        return "_"
    if v is CAPTURE:
        return "$"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Symbol):
        return v.name
    if is_compound(v):
        label, fields = decompose(v)
        if label is OBSERVE and len(fields) == 1:
            return "?" + format_value(fields[0])
        if label is OUTBOUND and len(fields) == 1:
            return "↓" + format_value(fields[0])
        if label is INBOUND and len(fields) == 1:
            return "↑" + format_value(fields[0])
        inner = " ".join(format_value(f) for f in fields)
        if label is None:
            return f"({inner})"
        return f"#{label.name}({inner})"
    raise NotAValue(f"cannot format {v!r}")


class _TextParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> ValueError:
        return ValueError(f"{msg} at offset {self.pos} in {self.text!r}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_value(self):
        self.skip_ws()
        ch = self.peek()
        if not ch:
            raise self.error("unexpected end of input")
        if ch == "?":
            self.pos += 1
            return observe(self.parse_value())
        if ch == "↓":
            self.pos += 1
            return outbound(self.parse_value())
        if ch == "↑":
            self.pos += 1
            return inbound(self.parse_value())
        if ch == "(":
            return tuple(self.parse_fields())
        if ch == "#":
            self.pos += 1
            name = self.parse_bare_word()
            if self.peek() != "(":
                raise self.error("expected '(' after record label")
            return Record(Symbol(name), tuple(self.parse_fields()))
        if ch == '"':
            return self.parse_string()
        if ch == "_":
            self.pos += 1
            return WILDCARD
        if ch == "$":
            self.pos += 1
            return CAPTURE
        word = self.parse_bare_word()
        return self.interpret_word(word)

    def parse_fields(self) -> list:
        assert self.peek() == "("
        self.pos += 1
        fields = []
        while True:
            self.skip_ws()
            if self.peek() == ")":
                self.pos += 1
                return fields
            if not self.peek():
                raise self.error("unterminated compound")
            fields.append(self.parse_value())

    def parse_string(self) -> str:
        start = self.pos
        self.pos += 1
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "\\":
                self.pos += 2
                continue
            if ch == '"':
                self.pos += 1
                return json.loads(self.text[start : self.pos])
            self.pos += 1
        raise self.error("unterminated string")

    def parse_bare_word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ' \t\r\n()"#?↓↑$' :
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a value")
        return self.text[start : self.pos]

    def interpret_word(self, word: str):
        if word == "true":
            return True
        if word == "false":
            return False
        try:
            return int(word)
        except ValueError:
            pass
        try:
            return float(word)
        except ValueError:
            pass
        return Symbol(word)


def parse_text(text: str):
    """Parse the canonical text encoding back into a value or pattern."""
    p = _TextParser(text)
    v = p.parse_value()
    p.skip_ws()
    if p.pos != len(p.text):
        raise p.error("trailing input")
    return v
