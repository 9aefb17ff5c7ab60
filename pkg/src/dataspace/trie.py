"""Canonical assertion tries.

A trie indexes sets of assertion values by their token serialization.
There are three node shapes: the empty trie, a leaf carrying a value,
and a branch with a default subtree (the wildcard continuation, which
consumes one whole value) plus token-labeled edges.  Canonical form
drops edges indistinguishable from the default and collapses empty
branches, so two canonical tries denote the same set exactly when they
are structurally equal.
"""
from __future__ import annotations

from typing import Callable, Iterable, Optional

from .values import (
    AtomTok,
    MalformedTokens,
    PushTok,
    Token,
    Value,
    WILDCARD,
    CAPTURE,
    atom_token,
    decompose,
    format_value,
    is_atom,
    is_compound,
    is_well_formed,
    parse_exact,
    push_token,
    serialize,
    token_sort_key,
)


class InfiniteSet(ValueError):
    """Raised when enumerating a trie that is not structurally finite."""


class Trie:
    __slots__ = ()


class _Empty(Trie):
    __slots__ = ()

    def __repr__(self) -> str:
        return "mt"

    def __hash__(self) -> int:
        return 0x9E3779B9


EMPTY = _Empty()


class Ok(Trie):
    __slots__ = ("value", "_hash")

    def __init__(self, value):
        self.value = value
        self._hash = hash(("ok", value))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Ok)
            and self._hash == other._hash
            and self.value == other.value
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"ok({_format_leaf(self.value)})"


class Branch(Trie):
    __slots__ = ("default", "edges", "_hash")

    def __init__(self, default: Trie, edges: dict):
        # Callers must go through branch(); this constructor trusts its input.
        self.default = default
        self.edges = edges
        self._hash = hash(("br", default, frozenset(edges.items())))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Branch)
            and self._hash == other._hash
            and self.default == other.default
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return render(self)


UNIT = Ok(())


def _format_leaf(value) -> str:
    if value == ():
        return "()"
    if isinstance(value, frozenset):
        return "{" + ",".join(str(x) for x in sorted(value)) + "}"
    return repr(value)


def make_tail(n: int, t: Trie) -> Trie:
    """Wrap ``t`` in ``n`` wildcard layers, each consuming one value."""
    if t is EMPTY:
        return EMPTY
    for _ in range(n):
        t = Branch(t, {})
    return t


def branch(default: Trie, edges: dict) -> Trie:
    """Canonicalizing branch constructor."""
    pruned = None
    for tok, child in edges.items():
        if child == make_tail(tok.arity, default):
            if pruned is None:
                pruned = dict(edges)
            del pruned[tok]
    if pruned is not None:
        edges = pruned
    if not edges and default is EMPTY:
        return EMPTY
    return Branch(default, edges)


def _edge(b: Branch, tok: Token) -> Trie:
    child = b.edges.get(tok)
    if child is None:
        return make_tail(tok.arity, b.default)
    return child


# ---------------------------------------------------------------------------
# Pattern compilation


def compile_pattern(alpha, pattern) -> Trie:
    """Compile a wildcard-capable pattern into a canonical trie leafed by ``alpha``."""
    return _compile(pattern, Ok(alpha))


def _compile(p, k: Trie) -> Trie:
    if p is WILDCARD:
        return branch(k, {})
    if p is CAPTURE:
        raise ValueError("capture marks are not allowed in plain patterns")
    if is_atom(p):
        return branch(EMPTY, {atom_token(p): k})
    if is_compound(p):
        _, fields = decompose(p)
        inner = k
        for f in reversed(fields):
            inner = _compile(f, inner)
        return branch(EMPTY, {push_token(p): inner})
    raise ValueError(f"not a pattern: {p!r}")


def assertion_set(values: Iterable[Value]) -> Trie:
    """Build a unit trie holding the given values (or patterns)."""
    t = EMPTY
    for v in values:
        t = union(t, compile_pattern((), v))
    return t


# ---------------------------------------------------------------------------
# Search


def search(key: list, t: Trie):
    """Look up a serialized value; returns the leaf value or None.

    The key must spell exactly one value.  Falling back to a branch
    default consumes the whole value beginning at the current token.
    """
    if not is_well_formed(key, 1):
        raise MalformedTokens(f"search key is not 1-well-formed: {key!r}")
    pos = 0
    while True:
        if t is EMPTY:
            return None
        if isinstance(t, Ok):
            return t.value if pos == len(key) else None
        if pos == len(key):
            return None
        tok = key[pos]
        child = t.edges.get(tok)
        if child is not None:
            pos += 1
            t = child
        else:
            # Skip the whole value starting here; the default covers it.
            need = 1
            while need:
                tok = key[pos]
                pos += 1
                need -= 1
                if isinstance(tok, PushTok):
                    need += tok.arity
            t = t.default


def search_value(v: Value, t: Trie):
    return search(serialize(v), t)


def contains(t: Trie, v: Value) -> bool:
    return search_value(v, t) is not None


def search_wild(key: list, t: Trie, combine_values: Callable):
    """Search with embedded wildcards, folding leaf values of all branches spanned."""
    def go(pos: int, t: Trie):
        if t is EMPTY:
            return None
        if isinstance(t, Ok):
            return t.value if pos == len(key) else None
        if pos == len(key):
            return None
        tok = key[pos]
        if tok is WILDCARD:
            acc = go(pos + 1, t.default)
            for etok, child in t.edges.items():
                sub = go_wilds(etok.arity, pos + 1, child)
                if sub is not None:
                    acc = sub if acc is None else combine_values(acc, sub)
            return acc
        child = t.edges.get(tok)
        if child is not None:
            return go(pos + 1, child)
        end = pos
        need = 1
        while need:
            k = key[end]
            end += 1
            need -= 1
            if isinstance(k, PushTok):
                need += k.arity
            elif k is WILDCARD:
                pass
        return go(end, t.default)

    def go_wilds(n: int, pos: int, t: Trie):
        # Match n whole values as wildcards before resuming the key.
        if n == 0:
            return go(pos, t)
        if t is EMPTY or isinstance(t, Ok):
            return None
        acc = go_wilds(n - 1, pos, t.default)
        for etok, child in t.edges.items():
            sub = go_wilds(n - 1 + etok.arity, pos, child)
            if sub is not None:
                acc = sub if acc is None else combine_values(acc, sub)
        return acc

    return go(0, t)


def serialize_wild(p) -> list:
    """Serialize a pattern into a key where wildcards stand for one value."""
    out: list = []

    def go(v):
        if v is WILDCARD:
            out.append(WILDCARD)
        elif is_atom(v):
            out.append(atom_token(v))
        elif is_compound(v):
            _, fields = decompose(v)
            out.append(push_token(v))
            for f in fields:
                go(f)
        else:
            raise ValueError(f"not a pattern: {v!r}")

    go(p)
    return out


# ---------------------------------------------------------------------------
# Set operations

#: One-sided handler: keep the present side unchanged.
KEEP = "keep"
#: One-sided handler: discard the present side.
DROP = "drop"


def combine(t1: Trie, t2: Trie, f: Callable, left_only=KEEP, right_only=KEEP) -> Trie:
    """Generic structural set operation on two tries of equal depth.

    ``f`` combines leaves (both arguments are Ok nodes).  ``left_only``
    and ``right_only`` state what happens to subtrees present on only
    one side: KEEP, DROP, or a callable mapping the subtree.
    """
    if left_only is KEEP:
        lo = _identity
    elif left_only is DROP:
        lo = _drop
    else:
        lo = left_only
    if right_only is KEEP:
        ro = _identity
    elif right_only is DROP:
        ro = _drop
    else:
        ro = right_only

    def go(a: Trie, b: Trie) -> Trie:
        if a is EMPTY:
            return ro(b)
        if b is EMPTY:
            return lo(a)
        if isinstance(a, Ok) or isinstance(b, Ok):
            return f(a, b)
        w = go(a.default, b.default)
        # Iterate the smaller edge map; ties go to the left operand.
        left_small = len(a.edges) <= len(b.edges)
        small = a if left_small else b
        large = b if left_small else a
        large_handler = ro if left_small else lo
        if small.default is EMPTY and large_handler is _drop:
            edges = {}
        elif small.default is EMPTY and large_handler is _identity:
            edges = dict(large.edges)
        else:
            edges = {}
            for tok in large.edges:
                if tok not in small.edges:
                    edges[tok] = go(_edge(a, tok), _edge(b, tok))
        for tok in small.edges:
            edges[tok] = go(_edge(a, tok), _edge(b, tok))
        return branch(w, edges)

    return go(t1, t2)


def _identity(t: Trie) -> Trie:
    return t


def _drop(_t: Trie) -> Trie:
    return EMPTY


def _leaf_left(a: Ok, _b: Ok) -> Trie:
    return a


def _leaf_none(_a: Ok, _b: Ok) -> Trie:
    return EMPTY


def union(t1: Trie, t2: Trie) -> Trie:
    return combine(t1, t2, _leaf_left)


def intersect(t1: Trie, t2: Trie) -> Trie:
    return combine(t1, t2, _leaf_left, DROP, DROP)


def subtract(t1: Trie, t2: Trie) -> Trie:
    return combine(t1, t2, _leaf_none, KEEP, DROP)


def _routes_union_leaf(a: Ok, b: Ok) -> Trie:
    return Ok(a.value | b.value)


def _routes_subtract_leaf(a: Ok, b: Ok) -> Trie:
    s = a.value - b.value
    return Ok(s) if s else EMPTY


def union_routes(t1: Trie, t2: Trie) -> Trie:
    """Union of routing tries whose leaves are frozensets of stream ids."""
    return combine(t1, t2, _routes_union_leaf)


def subtract_routes(t1: Trie, t2: Trie) -> Trie:
    """Remove the right side's leaf sets from the left routing trie."""
    return combine(t1, t2, _routes_subtract_leaf, KEEP, DROP)


def is_empty(t: Trie) -> bool:
    return t is EMPTY


def universe(n: int = 1) -> Trie:
    """The trie accepting every sequence of ``n`` values."""
    return make_tail(n, UNIT)


def negate(t: Trie, n: int = 1) -> Trie:
    """Set complement within sequences of ``n`` values."""
    if n == 0:
        return EMPTY if isinstance(t, Ok) else UNIT
    if t is EMPTY:
        return universe(n)
    if isinstance(t, Ok):
        raise ValueError("trie deeper than its declared well-formedness")
    edges = {
        tok: negate(child, n - 1 + tok.arity) for tok, child in t.edges.items()
    }
    return branch(negate(t.default, n - 1), edges)


def relabel(f: Callable, t: Trie) -> Trie:
    """Map (or drop) leaf values; f returns the new leaf value or None."""
    if t is EMPTY:
        return EMPTY
    if isinstance(t, Ok):
        new = f(t.value)
        return EMPTY if new is None else Ok(new)
    edges = {}
    for tok, child in t.edges.items():
        edges[tok] = relabel(f, child)
    return branch(relabel(f, t.default), edges)


def leaf_union(t: Trie) -> frozenset:
    """Union of all frozenset leaves of a routing trie."""
    acc: set = set()

    def go(t: Trie):
        if t is EMPTY:
            return
        if isinstance(t, Ok):
            acc.update(t.value)
            return
        go(t.default)
        for child in t.edges.values():
            go(child)

    go(t)
    return frozenset(acc)


# ---------------------------------------------------------------------------
# Projection


def project(spec, t: Trie) -> Trie:
    """Select assertions matching ``spec`` and keep only captured positions.

    The result is a unit trie over n-value sequences, n being the number
    of capture marks in the spec.
    """

    def finish(t2: Trie) -> Trie:
        return UNIT if isinstance(t2, Ok) else EMPTY

    return _walk(spec, t, finish)


def _walk(spec, t: Trie, k: Callable) -> Trie:
    if spec is CAPTURE:
        return _cap(t, k)
    if spec is WILDCARD:
        return _skip(t, k)
    if is_atom(spec):
        if not isinstance(t, Branch):
            return EMPTY
        return k(_edge(t, atom_token(spec)))
    if is_compound(spec):
        if not isinstance(t, Branch):
            return EMPTY
        _, fields = decompose(spec)
        child = _edge(t, push_token(spec))
        return _walk_seq(list(fields), child, k)
    raise ValueError(f"not a projection spec: {spec!r}")


def _walk_seq(specs: list, t: Trie, k: Callable) -> Trie:
    if not specs:
        return k(t)
    head, rest = specs[0], specs[1:]
    return _walk(head, t, lambda t2: _walk_seq(rest, t2, k))


def _skip(t: Trie, k: Callable) -> Trie:
    if not isinstance(t, Branch):
        return EMPTY
    acc = k(t.default)
    for tok, child in t.edges.items():
        acc = union(acc, _skip_n(tok.arity, child, k))
    return acc


def _skip_n(n: int, t: Trie, k: Callable) -> Trie:
    if n == 0:
        return k(t)
    return _skip(t, lambda t2: _skip_n(n - 1, t2, k))


def _cap(t: Trie, k: Callable) -> Trie:
    if not isinstance(t, Branch):
        return EMPTY
    edges = {}
    for tok, child in t.edges.items():
        edges[tok] = _cap_n(tok.arity, child, k)
    return branch(k(t.default), edges)


def _cap_n(n: int, t: Trie, k: Callable) -> Trie:
    if n == 0:
        return k(t)
    return _cap(t, lambda t2: _cap_n(n - 1, t2, k))


# ---------------------------------------------------------------------------
# Enumeration


def key_set(t: Trie) -> frozenset:
    """Enumerate a structurally finite trie as a set of value tuples."""
    out: set = set()

    def go(t: Trie, prefix: list):
        if t is EMPTY:
            return
        if isinstance(t, Ok):
            out.add(parse_exact(prefix))
            return
        if t.default is not EMPTY:
            raise InfiniteSet("trie is not structurally finite")
        for tok in sorted(t.edges, key=token_sort_key):
            go(t.edges[tok], prefix + [tok])

    go(t, [])
    return frozenset(out)


def pattern_set(t: Trie) -> frozenset:
    """Enumerate a trie built from finitely many patterns.

    Default branches read back as wildcards.  Unlike key_set this
    tolerates cofinite sets, as long as the branch structure is finite.
    """
    out: set = set()

    def go(t: Trie, prefix: list):
        if t is EMPTY:
            return
        if isinstance(t, Ok):
            out.add(_parse_wild(prefix))
            return
        if t.default is not EMPTY:
            go(t.default, prefix + [WILDCARD])
        for tok in sorted(t.edges, key=token_sort_key):
            go(t.edges[tok], prefix + [tok])

    go(t, [])
    return frozenset(out)


def _parse_wild(tokens: list) -> tuple:
    def one(pos: int):
        tok = tokens[pos]
        if tok is WILDCARD:
            return WILDCARD, pos + 1
        if isinstance(tok, AtomTok):
            return tok.payload, pos + 1
        fields = []
        pos += 1
        for _ in range(tok.arity):
            f, pos = one(pos)
            fields.append(f)
        from .values import Record

        return (tuple(fields) if tok.label is None else Record(tok.label, tuple(fields))), pos

    values = []
    pos = 0
    while pos < len(tokens):
        v, pos = one(pos)
        values.append(v)
    return tuple(values)


# ---------------------------------------------------------------------------
# Well-formedness and rendering


def check_wf(t: Trie, n: int) -> bool:
    """Decide whether ``t`` is n-well-formed."""
    if t is EMPTY:
        return True
    if isinstance(t, Ok):
        return n == 0
    if n == 0:
        return False
    return check_wf(t.default, n - 1) and all(
        check_wf(child, n - 1 + tok.arity) for tok, child in t.edges.items()
    )


def render(t: Trie) -> str:
    """Stable debug rendering: mt, ok(α), br(default, {tok→…})."""
    if t is EMPTY:
        return "mt"
    if isinstance(t, Ok):
        return f"ok({_format_leaf(t.value)})"
    items = ", ".join(
        f"{tok!r}→{render(t.edges[tok])}"
        for tok in sorted(t.edges, key=token_sort_key)
    )
    return f"br({render(t.default)}, {{{items}}})"


def wrap_trie(label, t: Trie) -> Trie:
    """Wrap every member of a 1-value trie in a unary labeled record."""
    if t is EMPTY:
        return EMPTY
    return branch(EMPTY, {PushTok(label, 1): t})


def unwrap_trie(label, t: Trie) -> Trie:
    """The set {c | label(c) ∈ t}; one edge hop thanks to implicit pops."""
    if not isinstance(t, Branch):
        return EMPTY
    return _edge(t, PushTok(label, 1))
