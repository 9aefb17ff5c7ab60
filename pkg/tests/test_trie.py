import random

import pytest
from hypothesis import given, settings, strategies as st

from dataspace import trie
from dataspace.trie import (
    EMPTY,
    Branch,
    InfiniteSet,
    Ok,
    assertion_set,
    branch,
    check_wf,
    compile_pattern,
    contains,
    key_set,
    make_tail,
    negate,
    project,
    render,
    search,
    search_wild,
    serialize_wild,
    union,
    intersect,
    subtract,
    universe,
)
from dataspace.values import (
    CAPTURE,
    MalformedTokens,
    Record,
    Symbol,
    WILDCARD,
    serialize,
)

from oracles import ATOMS, build_universe, match, meaning, random_pattern, _hashable

S = Symbol
U = build_universe()

patterns = st.builds(
    lambda seed: random_pattern(random.Random(seed)), st.integers(0, 10**9)
)
concrete_sets = st.lists(st.sampled_from(U), max_size=8).map(tuple)


def tset(values):
    return frozenset(_hashable(v[0]) for v in values)


@given(patterns)
def test_compiled_tries_well_formed(p):
    assert check_wf(compile_pattern((), p), 1)


@given(patterns, patterns)
def test_set_ops_preserve_wf_and_canonical_idempotence(p, q):
    a, b = compile_pattern((), p), compile_pattern((), q)
    for t in (union(a, b), intersect(a, b), subtract(a, b), negate(a)):
        assert check_wf(t, 1)
    assert union(a, a) == a
    assert intersect(a, a) == a
    assert subtract(a, a) is EMPTY
    assert union(a, EMPTY) == a
    assert intersect(a, EMPTY) is EMPTY


@given(patterns, st.sampled_from(U))
def test_search_agrees_with_matching(p, v):
    t = compile_pattern((), p)
    assert contains(t, v) == match(p, v)


@given(patterns, patterns, st.sampled_from(U))
def test_algebra_agrees_with_sets(p, q, v):
    a, b = compile_pattern((), p), compile_pattern((), q)
    assert contains(union(a, b), v) == (match(p, v) or match(q, v))
    assert contains(intersect(a, b), v) == (match(p, v) and match(q, v))
    assert contains(subtract(a, b), v) == (match(p, v) and not match(q, v))
    assert contains(negate(a), v) == (not match(p, v))


@given(patterns)
def test_double_negation_is_identity(p):
    t = compile_pattern((), p)
    assert negate(negate(t)) == t


@given(concrete_sets)
def test_key_set_roundtrip(values):
    t = assertion_set(values)
    assert key_set(t) == frozenset((v,) for v in set(map(_nohash, values)))


def _nohash(v):
    return v


@given(concrete_sets, concrete_sets)
def test_insertion_order_irrelevant(xs, ys):
    both = list(xs) + list(ys)
    rev = list(reversed(both))
    assert assertion_set(both) == assertion_set(rev)


def test_key_set_refuses_infinite():
    with pytest.raises(InfiniteSet):
        key_set(compile_pattern((), (WILDCARD, 1)))


def test_universe_and_negate_empty():
    assert negate(EMPTY) == universe(1)
    assert negate(universe(1)) is EMPTY
    assert contains(universe(1), (S("a"), (1, 2)))


def test_search_key_must_be_one_value():
    t = assertion_set([1])
    with pytest.raises(MalformedTokens):
        search(serialize(1) + serialize(2), t)


def test_default_fallback_skips_whole_value():
    # A trie of pairs (x, 1) for any x: searching must skip an entire
    # compound first element, not a single token.
    t = compile_pattern((), (WILDCARD, 1))
    assert contains(t, ((S("a"), (S("b"),)), 1))
    assert not contains(t, ((S("a"),), 2))


def test_search_wild_unions_routing_leaves():
    r = trie.union_routes(
        trie.relabel(lambda _: frozenset({1}), assertion_set([(S("a"), 0)])),
        trie.relabel(lambda _: frozenset({2}), compile_pattern((), (S("a"), WILDCARD))),
    )
    key = serialize_wild((S("a"), WILDCARD))
    assert search_wild(key, r, frozenset.union) == frozenset({1, 2})
    assert search(serialize((S("a"), 0)), r) == frozenset({1, 2})
    assert search(serialize((S("a"), 5)), r) == frozenset({2})


def test_canonical_constructor_prunes_redundant_edges():
    w = compile_pattern((), WILDCARD)
    assert isinstance(w, Branch) and not w.edges
    # an edge identical to what the default implies must vanish
    t = branch(Ok(()), {trie.atom_token(1): Ok(())})
    assert t == branch(Ok(()), {})
    assert branch(EMPTY, {}) is EMPTY


def test_make_tail_of_empty_is_empty():
    assert make_tail(3, EMPTY) is EMPTY


def test_projection_selects_captures():
    pres, says = S("present"), S("says")
    store = assertion_set(
        [
            Record(pres, (S("a"),)),
            Record(pres, (S("b"),)),
            Record(says, (S("a"), "hello")),
        ]
    )
    got = key_set(project(Record(says, (CAPTURE, CAPTURE)), store))
    assert got == frozenset({(S("a"), "hello")})
    got = key_set(project(Record(pres, (CAPTURE,)), store))
    assert got == frozenset({(S("a"),), (S("b"),)})


def test_projection_of_wildcard_capture_is_infinite():
    t = compile_pattern((), (S("x"), WILDCARD))
    with pytest.raises(InfiniteSet):
        key_set(project((S("x"), CAPTURE), t))


@given(concrete_sets, patterns)
def test_projection_oracle_on_finite_sets(values, p):
    spec = _capture_everything(p)
    t = assertion_set(values)
    from oracles import match_captures

    expected = set()
    for v in set(values):
        caps = match_captures(spec, v)
        if caps is not None:
            expected.add(tuple(_hashable(c) for c in caps))
    got = {
        tuple(_hashable(c) for c in caps) for caps in key_set(project(spec, t))
    }
    assert got == expected


def _capture_everything(p):
    # replace each wildcard with a capture so projections stay finite
    if p is WILDCARD:
        return CAPTURE
    if isinstance(p, tuple):
        return tuple(_capture_everything(f) for f in p)
    return p


def test_render_stable_forms():
    assert render(EMPTY) == "mt"
    assert render(Ok(())) == "ok(())"
    t = compile_pattern((), (WILDCARD, 1))
    assert render(t) == "br(mt, {⟪2→br(br(mt, {1→ok(())}), {})})"


def test_relabel_drops_and_maps():
    t = assertion_set([1, 2])
    r = trie.relabel(lambda _: frozenset({7}), t)
    assert search(serialize(1), r) == frozenset({7})
    assert trie.relabel(lambda _: None, t) is EMPTY


@given(concrete_sets)
def test_pattern_set_reads_back_finite_sets(values):
    t = assertion_set(values)
    assert trie.pattern_set(t) == key_set(t)
