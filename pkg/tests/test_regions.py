import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from etop.model import TRUE, Edge, Guard, ModelError, TimedSystem, atom
from etop.regions import (
    RegionCapExceeded,
    build_region_graph,
    ceilings,
    key_to_region,
    region_automaton,
    region_of,
    sample_valuation,
)
from etop.testsupport import example_at
from etop.transforms import INF, absorb_final, add_tick, classify

from conftest import systems


def test_ceilings_example():
    assert ceilings(example_at(2, 4)) == (4,)
    assert ceilings(example_at(1, 2)) == (3,)


def test_ceiling_of_unused_clock_is_zero():
    ta = TimedSystem("t", ("a", "p", "f"), ("x", "y"), 0, 1, 2, (Edge(0, Guard((atom(0, "<", 2),)), "e", (), 2),))
    assert ceilings(ta) == (2, 0)


def test_region_of_initial():
    r = region_of(0, [0, 0], (3, 3))
    assert r.zero == (True, True) and r.order == ()


def test_region_of_equal_fractions():
    r = region_of(0, [Fraction(14, 10), Fraction(4, 10)], (3, 3))
    assert r.ints == (1, 0)
    assert r.order == (frozenset({0, 1}),)


def test_region_of_above_ceiling():
    r = region_of(0, [5], (4,))
    assert r.ints == (5,) and not r.zero[0] and r.order == ()


def test_selected_final_must_be_absorbing():
    ta = TimedSystem("t", ("a", "p", "f"), ("x",), 0, 1, 2, (Edge(2, TRUE, "e", (), 0),))
    with pytest.raises(ModelError):
        region_automaton(ta, 2)


def test_unreachable_final_accepts_nothing():
    ta = add_tick(TimedSystem("t", ("a", "p", "f"), ("x",), 0, 1, 2), skip={2})
    ra = region_automaton(ta, 2)
    assert not ra.accept_exact and not ra.accept_frac


def test_exact_arrival_at_one():
    ta = TimedSystem("t", ("a", "p", "f"), ("x",), 0, 1, 2, (Edge(0, Guard((atom(0, "==", 1),)), "e", (), 2),))
    ra = region_automaton(add_tick(ta, skip={2}), 2)
    assert sorted(ra.accept_exact.values()) == [0, 1]
    assert not ra.accept_frac
    assert len(ra.states) <= 20


def test_public_final_of_example():
    # public arrivals of the example at (1, 2): exact 0..3 and every open unit cell below 3
    cs = classify(example_at(1, 2), INF)
    ticked = add_tick(cs.product, skip=cs.finals)
    graph = build_region_graph(ticked, set(cs.finals))
    from etop.regions import automaton_for
    from etop.unary import unary_language

    ra = automaton_for(graph, cs.final_public)
    assert unary_language(ra, "exact").members_below(10) == [0, 1, 2, 3]
    assert unary_language(ra, "frac").members_below(10) == [0, 1, 2]


def test_state_cap():
    ta = add_tick(example_at(1, 2), skip={2})
    with pytest.raises(RegionCapExceeded):
        build_region_graph(ta, {2}, cap=5)


def _graph(sys):
    ticked = add_tick(absorb_final(sys), skip={sys.final})
    return build_region_graph(ticked, {sys.final})


@given(systems, st.integers(0, 10**6))
def test_transitions_have_concrete_witnesses(sys, salt):
    graph = _graph(sys)
    rng = random.Random(salt)
    n = len(graph.sys.clocks)
    for s in rng.sample(range(graph.size), min(graph.size, 15)):
        key = graph.keys[s]
        ceil = graph.ceil_at(key[0])
        src = key_to_region(key, ceil)
        val = sample_valuation(src, ceil, rng)
        assert key_to_region(key, ceil) == region_of(key[0], val, ceil)
        for d in graph.eps[s] + graph.tick[s]:
            dkey = graph.keys[d]
            dceil = graph.ceil_at(dkey[0])
            target = key_to_region(dkey, dceil)
            assert _has_successor(graph, key, val, dkey, target, dceil), (src, target)


def _has_successor(graph, key, val, dkey, target, dceil):
    sys = graph.sys
    loc = key[0]
    # discrete step
    for e in sys.edges:
        if e.source == loc and e.target == dkey[0] and e.guard.holds(val):
            nv = [Fraction(0) if i in e.resets else v for i, v in enumerate(val)]
            if region_of(dkey[0], nv, dceil) == target:
                return True
    # delay step: try every fractional boundary and the midpoints between them
    if loc == dkey[0]:
        bounds = sorted({1 - (v - int(v)) for v in val} | {Fraction(1)})
        cands = bounds + [(a + b) / 2 for a, b in zip([Fraction(0)] + bounds, bounds)]
        for d in cands:
            if region_of(loc, [v + d for v in val], dceil) == target:
                return True
    return False


@given(systems, st.integers(0, 10**6))
def test_region_of_constant_on_region(sys, salt):
    graph = _graph(sys)
    rng = random.Random(salt)
    s = rng.randrange(graph.size)
    key = graph.keys[s]
    ceil = graph.ceil_at(key[0])
    reg = key_to_region(key, ceil)
    for _ in range(100):
        assert region_of(key[0], sample_valuation(reg, ceil, rng), ceil) == reg
