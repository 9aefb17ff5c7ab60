import random

from hypothesis import given, strategies as st

from dataspace import trie
from dataspace.patch import (
    EMPTY_PATCH,
    Patch,
    aggregate_visibility,
    apply_patch,
    compose,
    drop_outbound,
    from_sets,
    label_patch,
    lift_inbound,
    limit,
    render,
    unwrap_patch,
)
from dataspace.trie import EMPTY, assertion_set
from dataspace.values import INBOUND, OUTBOUND, Symbol, observe, outbound, inbound

from oracles import build_universe

S = Symbol
U = build_universe()

value_sets = st.lists(st.sampled_from(U), max_size=6).map(tuple)
patches = st.builds(lambda a, r: from_sets(a, r), value_sets, value_sets)


@given(value_sets, value_sets)
def test_patch_halves_disjoint(a, r):
    p = from_sets(a, r)
    assert trie.intersect(p.added, p.removed) is EMPTY


@given(patches, patches, value_sets)
def test_compose_matches_sequential_application(newer, older, base):
    s = assertion_set(base)
    assert apply_patch(apply_patch(s, older), newer) == apply_patch(
        s, compose(newer, older)
    )


@given(patches, patches, patches, value_sets)
def test_compose_associative_on_application(p3, p2, p1, base):
    s = assertion_set(base)
    assert apply_patch(s, compose(compose(p3, p2), p1)) == apply_patch(
        s, compose(p3, compose(p2, p1))
    )


@given(patches, value_sets)
def test_limit_reports_true_change_only(p, base):
    s = assertion_set(base)
    limited = limit(p, s)
    assert trie.intersect(limited.added, s) is EMPTY
    assert trie.subtract(limited.removed, s) is EMPTY
    assert apply_patch(s, limited) == apply_patch(s, p)
    assert limit(limited, s) == limited


@given(patches, value_sets)
def test_visibility_hides_what_others_still_assert(p, others):
    o = assertion_set(others)
    vis = aggregate_visibility(p, o)
    assert trie.intersect(vis.added, o) is EMPTY
    assert trie.intersect(vis.removed, o) is EMPTY


def test_empty_patch_is_identity():
    s = assertion_set([1, (S("a"),)])
    assert apply_patch(s, EMPTY_PATCH) == s
    assert compose(EMPTY_PATCH, EMPTY_PATCH).is_empty()


def test_label_and_unwrap_roundtrip():
    p = from_sets([1, (S("a"), 2)], [S("b")])
    assert unwrap_patch(label_patch(p, INBOUND), INBOUND) == p


def test_lift_inbound_wraps_everything():
    p = from_sets([S("x")], [S("y")])
    lifted = lift_inbound(p)
    assert trie.contains(lifted.added, inbound(S("x")))
    assert trie.contains(lifted.removed, inbound(S("y")))


def test_drop_outbound_translates_layer_boundary():
    p = from_sets(
        [outbound(S("x")), observe(inbound(S("y"))), S("internal")],
        [outbound(S("z"))],
    )
    dropped = drop_outbound(p)
    assert trie.key_set(dropped.added) == frozenset({(S("x"),), (observe(S("y")),)})
    assert trie.key_set(dropped.removed) == frozenset({(S("z"),)})


def test_render_sorted_and_stable():
    p = from_sets([S("b"), S("a")], [1])
    assert render(p) == "+{a, b}/-{1}"
