import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from etop.durations import DurationSet, duration_set, duration_sets, ds_equals, ds_rescale, ds_union
from etop.model import TRUE, Edge, ModelError, TimedSystem, atom, Guard, instantiate, scale, validate
from etop.opacity import class_sets
from etop.regions import build_region_graph
from etop.testsupport import running_example, example_at
from etop.transforms import (
    INF,
    absorb_final,
    add_tick,
    as_bound,
    classify,
    swap_transform,
    swap_transform_reverse,
)

from conftest import systems

deltas = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)])


def shift(ds: DurationSet, amount: Fraction) -> DurationSet:
    d = math.lcm(ds.denom, amount.denominator)
    ds = ds_rescale(ds, d)
    n = int(amount * d)
    return DurationSet(ds.points.shifted(n), ds.opens.shifted(n), d)


def test_as_bound():
    assert as_bound("inf") is INF
    assert as_bound("3/2") == Fraction(3, 2)
    assert as_bound("2.5") == Fraction(5, 2)
    with pytest.raises(TypeError):
        as_bound(2.5)
    with pytest.raises(ValueError):
        as_bound(-1)


def test_absorb_final_keeps_example():
    ta = example_at(1, 2)
    assert absorb_final(ta) is ta


def test_absorb_final_drops_self_loop_and_chain():
    ta = TimedSystem(
        "t", ("a", "p", "f", "g"), ("x",), 0, 1, 2,
        (Edge(0, TRUE, "e", frozenset(), 2), Edge(2, TRUE, "loop", frozenset(), 2), Edge(2, TRUE, "on", frozenset(), 3)),
    )
    out = absorb_final(ta)
    assert [e.action for e in out.edges] == ["e"]


def test_classify_example_scaled():
    ta = scale(example_at(1, Fraction(5, 2)), 2)
    cs = classify(ta, 2)
    sets, _ = duration_sets(cs.product, cs.finals)
    assert str(sets[cs.final_secret]) == "[2, 5]"
    assert str(sets[cs.final_expired]) == "(4, 5]"
    assert str(sets[cs.final_public]) == "[0, 6]"
    assert validate(cs.product) == []


def test_classify_infinite_delta_has_no_expired():
    cs = classify(example_at(1, 2), INF)
    sets, _ = duration_sets(cs.product, cs.finals)
    assert sets[cs.final_expired].is_empty()
    assert str(sets[cs.final_secret]) == "[1, 2]"


def test_classify_unreachable_private():
    cs = classify(example_at(4, 2), 1)
    sets, _ = duration_sets(cs.product, cs.finals)
    assert sets[cs.final_secret].is_empty() and sets[cs.final_expired].is_empty()
    assert not sets[cs.final_public].is_empty()


def test_classify_rejects_off_grid_delta():
    with pytest.raises(ModelError):
        classify(example_at(1, 2), Fraction(1, 3))


def test_add_tick_single_location():
    ta = TimedSystem("t", ("a",), ("x",), 0, 0, 0)
    out = add_tick(ta)
    assert [e.action for e in out.edges] == ["tick"]
    assert out.clocks[-1] == "tick"


def test_add_tick_example():
    out = add_tick(example_at(1, 2))
    assert sum(e.action == "tick" for e in out.edges) == 3
    t = len(out.clocks) - 1
    assert atom(t, "<=", 1) in out.invariants[0].atoms and atom(0, "<=", 3) in out.invariants[0].atoms


def test_add_tick_skips_classified_finals():
    cs = classify(example_at(1, 2), 1)
    out = add_tick(cs.product, skip=cs.finals)
    looped = {e.source for e in out.edges if e.action == "tick"}
    assert looped.isdisjoint(cs.finals)


def test_add_tick_needs_integer_grid():
    with pytest.raises(ModelError):
        add_tick(example_at(1, Fraction(5, 2)))


@given(systems)
def test_tick_clock_stays_in_unit_interval(sys):
    ticked = add_tick(absorb_final(sys), skip={sys.final})
    graph = build_region_graph(ticked, {sys.final})
    t = len(ticked.clocks) - 1
    assert all(classes[t] <= 2 for _, classes, _ in graph.keys)


@given(systems, deltas)
def test_classify_partitions_final_arrivals(sys, delta):
    cs = classify(scale(sys, delta.denominator), delta * delta.denominator)
    sets, _ = duration_sets(cs.product, cs.finals)
    union = ds_union(ds_union(sets[cs.final_secret], sets[cs.final_expired]), sets[cs.final_public])
    assert ds_equals(union, duration_set(scale(sys, delta.denominator)))


def test_swap_structure():
    out = swap_transform(example_at(1, 2), 1)
    old_final = 2
    assert len([e for e in out.edges if e.source == old_final]) == 2
    rev = swap_transform_reverse(example_at(1, 2), 1)
    assert len([e for e in rev.edges if e.source == old_final]) == 3
    assert validate(out) == [] and validate(rev) == []


def test_swap_initial_wait_is_delta_plus_one():
    out = swap_transform(example_at(1, 2), 0)
    start = [e for e in out.edges if e.source == out.init]
    assert len(start) == 1
    assert start[0].guard.atoms[0].op == "==" and start[0].guard.atoms[0].value == 1


def test_swap_needs_finite_delta():
    with pytest.raises(ModelError):
        swap_transform(example_at(1, 2), INF)


def test_swap_shifts_example_durations():
    ta = example_at(1, Fraction(5, 2))
    sw = class_sets(swap_transform(ta, 1), 1)
    # swapped sides: secret is old non-secret, shifted by 2
    assert str(sw.secret) == "[2, 5]"
    assert str(sw.non_secret) == "[3, 9/2]"


@given(systems, deltas)
def test_swap_exchanges_sides(sys, delta):
    base = class_sets(sys, delta)
    sw = class_sets(swap_transform(sys, delta), delta)
    assert ds_equals(sw.secret, shift(base.non_secret, delta + 1))
    assert ds_equals(sw.non_secret, shift(base.secret, delta + 1))
