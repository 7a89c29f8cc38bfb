import math
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from etop.durations import (
    Cell,
    DurationSet,
    ds_equals,
    ds_first_diff,
    ds_includes,
    ds_rescale,
    ds_union,
    duration_set,
)
from etop.model import TimedSystem
from etop.opacity import class_sets
from etop.testsupport import example_at
from etop.transforms import INF
from etop.unary import UPSet

from conftest import fractional_systems, systems

bits = st.lists(st.booleans(), max_size=6)
upsets = st.builds(lambda p, c: UPSet(tuple(p), tuple(c) or (False,)), bits, bits)
dsets = st.builds(DurationSet, upsets, upsets, st.sampled_from([1, 2, 3]))


def interval(lo, hi, lo_closed=True, hi_closed=True, denom=1):
    """Real interval as a DurationSet on the 1/denom grid (test helper)."""
    lo, hi = Fraction(lo) * denom, Fraction(hi) * denom
    pts = [k for k in range(int(hi) + 1) if (lo < k or (lo_closed and lo == k)) and (k < hi or (hi_closed and k == hi))]
    opens = [k for k in range(int(hi)) if lo <= k and k + 1 <= hi]
    return DurationSet(UPSet.finite(pts), UPSet.finite(opens), denom)


def samples(limit=8, per_unit=12):
    return [Fraction(k, per_unit) for k in range(limit * per_unit)]


def test_example_class_sets():
    cs = class_sets(example_at(1, Fraction(5, 2)), 1)
    assert ds_equals(cs.public, interval(0, 3))
    assert ds_equals(cs.expired, interval(2, Fraction(5, 2), lo_closed=False, denom=2))
    assert ds_equals(cs.secret, interval(1, Fraction(5, 2), denom=2))
    assert cs.secret.intervals() == [(1, True, Fraction(5, 2), True)]
    assert cs.expired.intervals() == [(2, False, Fraction(5, 2), True)]


def test_unreachable_final_is_empty():
    ta = TimedSystem("t", ("a", "p", "f"), ("x",), 0, 1, 2)
    assert duration_set(ta).is_empty()


def test_unreachable_private_when_guard_exceeds_invariant():
    cs = class_sets(example_at(4, 2), 1)
    assert cs.secret.is_empty() and cs.expired.is_empty()


def test_rescale_identity():
    a = interval(1, 2)
    assert ds_rescale(a, 1) == a


def test_rescale_point_and_cell():
    a = DurationSet(UPSet.finite([1]), UPSet.finite([1]), 1)
    b = ds_rescale(a, 2)
    assert [k for k in range(8) if k in b.points] == [2, 3]
    assert [k for k in range(8) if k in b.opens] == [2, 3]


def test_rescale_closed_interval_by_sampling():
    a = interval(0, 3)
    b = ds_rescale(a, 2)
    for k in range(13):
        x = Fraction(k, 4)
        assert (x in a) == (x in b) == (x <= 3)


def test_example_inclusion_and_equality():
    secret = interval(1, Fraction(5, 2), denom=2)
    rest = ds_union(interval(2, Fraction(5, 2), lo_closed=False, denom=2), interval(0, 3))
    assert ds_includes(secret, rest)
    assert not ds_equals(secret, rest)
    cell = ds_first_diff(secret, rest, "equals")
    assert cell == Cell("point", 0, 2)
    assert ds_equals(secret, secret)


def test_str_and_json():
    cs = class_sets(example_at(1, Fraction(5, 2)), 1)
    assert str(cs.expired) == "(2, 5/2]"
    assert cs.public.to_json()["intervals"] == [{"lo": "0", "lo_closed": True, "hi": "3", "hi_closed": True}]


@given(dsets, dsets)
def test_first_diff_is_least_by_scan(a, b):
    d = math.lcm(a.denom, b.denom)
    for mode in ("includes", "equals"):
        cell = ds_first_diff(a, b, mode)
        grid = []
        for k in range(40 * d):
            grid.append(Fraction(k, d))
            grid.append(Fraction(2 * k + 1, 2 * d))
        expected = None
        for x in grid:
            x_in_a, x_in_b = x in a, x in b
            if (x_in_a and not x_in_b) if mode == "includes" else (x_in_a != x_in_b):
                expected = x
                break
        if cell is None:
            assert expected is None
        else:
            assert cell.representative == expected


@given(dsets, st.sampled_from([1, 2, 3]))
def test_rescale_preserves_membership(a, m):
    b = ds_rescale(a, a.denom * m)
    for x in samples(6, 12):
        assert (x in a) == (x in b)


@given(systems, st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]))
def test_lag_partition(sys, delta):
    cs = class_sets(sys, delta)
    top = class_sets(sys, INF)
    assert ds_equals(ds_union(cs.secret, cs.expired), top.secret)


@given(systems)
def test_monotone_in_delta(sys):
    chain = [Fraction(k, 2) for k in range(11)]
    prev = None
    for delta in chain:
        cs = class_sets(sys, delta)
        if prev is not None:
            assert ds_includes(prev.secret, cs.secret)
            assert ds_includes(cs.expired, prev.expired)
        prev = cs


@given(fractional_systems)
def test_fractional_constants_match_scaled(sys):
    from etop.model import scale

    d = sys.denom
    a = duration_set(sys)
    b = duration_set(scale(sys, d))
    for x in samples(6, 2 * d):
        assert (x in a) == (x * d in b)
