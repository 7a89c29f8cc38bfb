import pytest
from hypothesis import given
from hypothesis import strategies as st

from etop.durations import duration_set
from etop.model import validate
from etop.testsupport import GenSpec, running_example, gen_ta, load_model

from conftest import seeds


def test_seed_determinism():
    assert gen_ta(GenSpec(seed=42)) == gen_ta(GenSpec(seed=42))
    assert gen_ta(GenSpec(seed=42)) != gen_ta(GenSpec(seed=43))


def test_single_location_spec_still_gives_two():
    ta = gen_ta(GenSpec(max_locations=1, seed=3))
    assert len(ta.locations) >= 2 and ta.init != ta.final


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(strict_prob=0.1)
    with pytest.raises(ValueError):
        GenSpec(max_clocks=0)


def test_reachable_final_rate():
    reachable = sum(not duration_set(gen_ta(GenSpec(seed=s))).is_empty() for s in range(500))
    assert reachable >= 250


def test_bundled_models_parse():
    assert load_model("example") == running_example()
    for name in ("same_time", "late_secret", "secret_only", "narrow_full"):
        assert validate(load_model(name)) == []


@given(seeds, st.integers(2, 5), st.integers(1, 3), st.integers(0, 6))
def test_generated_systems_are_valid(seed, locs, clocks, const):
    ta = gen_ta(GenSpec(max_locations=locs, max_clocks=clocks, max_constant=const, seed=seed))
    assert validate(ta) == []
    assert len(ta.clocks) <= clocks
    assert all(a.value <= const for a in ta.atoms())


@given(seeds)
def test_strict_guards_appear(seed):
    ta = gen_ta(GenSpec(seed=seed, strict_prob=1.0))
    assert all(a.op in ("<", ">", "==") for a in ta.atoms())
