from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from etop.model import (
    TRUE,
    AtomicConstraint,
    Edge,
    Guard,
    LinExpr,
    ModelError,
    TimedSystem,
    atom,
    instantiate,
    lu_classify,
    scale,
    validate,
)
from etop.testsupport import running_example

from conftest import systems


def tiny(**kw):
    base = dict(
        name="t",
        locations=("a", "b", "c"),
        clocks=("x",),
        init=0,
        private=1,
        final=2,
        edges=(Edge(0, TRUE, "go", frozenset(), 2),),
    )
    base.update(kw)
    return TimedSystem(**base)


def test_example_is_valid():
    assert validate(running_example()) == []


def test_init_equals_final_is_reported():
    assert validate(tiny(final=0)) == ["init equals final"]


def test_undeclared_reset_names_the_edge():
    diags = validate(tiny(edges=(Edge(0, TRUE, "go", frozenset({3}), 2),)))
    assert len(diags) == 1
    assert "edge #0 a->c" in diags[0] and "3" in diags[0]


def test_instantiate_integer_valuation():
    ta = instantiate(running_example(), {"p1": 1, "p2": 2})
    assert not ta.is_parametric
    assert ta.denom == 1
    assert ta.edges[0].guard.atoms[0].value == 1
    assert ta.invariants[ta.loc("lpriv")].atoms[0].value == 2


def test_instantiate_half_valuation_stores_denominator_two():
    ta = instantiate(running_example(), {"p1": 1, "p2": Fraction(5, 2)})
    assert ta.denom == 2
    assert sorted(c * ta.denom for c in ta.constants()) == [2, 5, 6]


def test_instantiate_parameter_free_is_identity():
    ta = instantiate(running_example(), {"p1": 0, "p2": 3})
    assert instantiate(ta, {"p1": 7}) == ta


def test_instantiate_rejects_missing_and_negative():
    with pytest.raises(ModelError):
        instantiate(running_example(), {"p1": 1})
    with pytest.raises(ModelError):
        instantiate(running_example(), {"p1": -1, "p2": 2})


def test_scale_identity_and_constants():
    ta = instantiate(running_example(), {"p1": 1, "p2": 2})
    assert scale(ta, 1) is ta
    doubled = scale(ta, 2)
    assert doubled.edges[0].guard.atoms[0].value == 2
    assert {a.value for a in doubled.atoms()} == {2, 4, 6}


def test_scale_half_grid_to_integers():
    ta = instantiate(running_example(), {"p1": 1, "p2": Fraction(5, 2)})
    assert scale(ta, 2).denom == 1


def test_scale_rejects_bad_input():
    with pytest.raises(ModelError):
        scale(running_example(), 2)
    with pytest.raises(ModelError):
        scale(instantiate(running_example(), {"p1": 1, "p2": 2}), 0)


def test_lu_classification():
    roles = lu_classify(running_example()).roles
    assert roles == {"p1": "lower", "p2": "upper"}
    assert lu_classify(running_example()).is_lu


def test_lu_violation():
    p = LinExpr(((0, 1),))
    sys = tiny(
        params=("p",),
        edges=(Edge(0, Guard((AtomicConstraint(0, "<=", p), AtomicConstraint(0, ">=", p))), "go", frozenset(), 2),),
    )
    assert lu_classify(sys).roles == {"p": "violating"}
    assert not lu_classify(sys).is_lu


def test_lu_parameter_free():
    assert lu_classify(tiny()).roles == {}


def test_guard_semantics():
    g = Guard((atom(0, ">", 1), atom(0, "<=", Fraction(5, 2))))
    assert not g.holds([1])
    assert g.holds([Fraction(5, 2)])
    assert TRUE.holds([99])


@given(st.fractions(min_value=0, max_value=10), st.fractions(min_value=0, max_value=10))
def test_instantiate_yields_valid_parameter_free(p1, p2):
    ta = instantiate(running_example(), {"p1": p1, "p2": p2})
    assert not ta.params and validate(ta) == []
    for a in ta.atoms():
        c = a.value
        assert c.denominator > 0 and Fraction(c.numerator, c.denominator) == c


@given(systems, st.integers(1, 4), st.integers(1, 4))
def test_scale_composes(sys, a, b):
    assert scale(scale(sys, a), b) == scale(sys, a * b)
