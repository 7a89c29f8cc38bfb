from hypothesis import given
from hypothesis import strategies as st

from etop.model import Edge, Guard, TimedSystem, atom, scale
from etop.regions import automaton_for, build_region_graph, region_automaton
from etop.testsupport import example_at
from etop.transforms import absorb_final, add_tick, classify
from etop.unary import (
    UPSet,
    lasso,
    unary_language,
    up_difference,
    up_equals,
    up_first_diff,
    up_includes,
    up_intersect,
    up_union,
)

from conftest import systems

bits = st.lists(st.booleans(), max_size=8)
upsets = st.builds(lambda p, c: UPSet(tuple(p), tuple(c) or (False,)), bits, bits)


def members(a: UPSet, n: int):
    return [k in a for k in range(n)]


def test_empty_automaton():
    ta = add_tick(TimedSystem("t", ("a", "p", "f"), ("x",), 0, 1, 2), skip={2})
    assert unary_language(region_automaton(ta, 2), "exact") == UPSet((), (False,))


def test_example_public_scaled():
    cs = classify(scale(example_at(1, "5/2"), 2), 2)
    graph = build_region_graph(add_tick(cs.product, skip=cs.finals), set(cs.finals))
    ra = automaton_for(graph, cs.final_public)
    assert unary_language(ra, "exact") == UPSet.finite(range(7))
    assert unary_language(ra, "frac") == UPSet.finite(range(6))


def test_even_tick_counts():
    # reach the final at every even integer time
    ta = TimedSystem(
        "even", ("a", "p", "f"), ("x", "c"), 0, 1, 2,
        (
            Edge(0, Guard((atom(0, "==", 2),)), "wrap", {0}, 0),
            Edge(0, Guard((atom(0, "==", 0),)), "stop", (), 2),
        ),
        (Guard((atom(0, "<=", 2),)),),
    )
    ra = region_automaton(add_tick(ta, skip={2}), 2)
    assert unary_language(ra, "exact") == UPSet((), (True, False))
    assert unary_language(ra, "frac").is_empty()


def test_canonical_examples():
    assert up_includes(UPSet(), UPSet((True,), (False, True)))
    assert up_equals(UPSet((), (True,)), UPSet((True,), (True,)))
    assert UPSet((), (True,)) == UPSet((True,), (True,))
    a = UPSet.finite(range(7))
    assert up_first_diff(a, up_union(UPSet.finite(range(6)), UPSet.finite([6])), "equals") is None
    assert up_first_diff(a, UPSet.finite(range(6)), "equals") == 6


@given(upsets, upsets)
def test_operations_pointwise(a, b):
    n = 3 * (a.start + b.start + a.period * b.period) + 5
    for k in range(n):
        assert (k in up_union(a, b)) == (k in a or k in b)
        assert (k in up_intersect(a, b)) == (k in a and k in b)
        assert (k in up_difference(a, b)) == (k in a and k not in b)


@given(upsets, upsets)
def test_canonical_uniqueness(a, b):
    assert up_equals(a, b) == (a == b)


@given(upsets, upsets)
def test_horizon_is_enough(a, b):
    start, period = a.horizon(b)
    near = members(a, start + period + 1) == members(b, start + period + 1)
    far = members(a, 10 * (start + period + 1)) == members(b, 10 * (start + period + 1))
    assert near == far


@given(upsets, upsets)
def test_includes_matches_pointwise(a, b):
    n = 10 * (a.start + b.start + a.period * b.period + 1)
    assert up_includes(a, b) == all(k in b for k in range(n) if k in a)


@given(upsets, st.integers(0, 5))
def test_shift(a, n):
    s = a.shifted(n)
    assert all((k + n in s) == (k in a) for k in range(40))
    assert not any(k in s for k in range(n))


@given(systems)
def test_unary_language_matches_tick_counting(sys):
    ticked = add_tick(absorb_final(sys), skip={sys.final})
    graph = build_region_graph(ticked, {sys.final})
    ra = automaton_for(graph, sys.final)
    # direct BFS: level k is the closure of the states reached after k ticks
    level = _closure(graph, {0})
    exact = unary_language(ra, "exact")
    frac = unary_language(ra, "frac")
    prev_at1 = False
    for k in range(50):
        at0 = bool(level & ra.exact0)
        assert (k in exact) == (at0 or prev_at1)
        assert (k in frac) == bool(level & ra.frac)
        prev_at1 = bool(level & ra.exact1)
        level = _closure(graph, {d for s in level for d in graph.tick[s]})
    assert lasso(graph).subset_count >= 1


def _closure(graph, seeds):
    seen, stack = set(seeds), list(seeds)
    while stack:
        s = stack.pop()
        for d in graph.eps[s]:
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return seen
