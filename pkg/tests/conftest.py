from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from etop.model import AtomicConstraint, Guard, LinExpr, TimedSystem
from etop.testsupport import GenSpec, running_example, gen_ta

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=10**6)
systems = seeds.map(lambda s: gen_ta(GenSpec(seed=s)))


def shrink_constants(sys: TimedSystem, d: int) -> TimedSystem:
    """Divide every constant by ``d`` (puts the system on a ``1/d`` grid)."""
    def f(a):
        return AtomicConstraint(a.clock, a.op, LinExpr.const(a.value / d))

    invs = tuple(Guard(tuple(f(a) for a in g.atoms)) for g in sys.invariants)
    edges = tuple(e.__class__(e.source, Guard(tuple(f(a) for a in e.guard.atoms)), e.action, e.resets, e.target)
                  for e in sys.edges)
    return sys.with_(invariants=invs, edges=edges)


fractional_systems = st.tuples(seeds, st.sampled_from([2, 3])).map(
    lambda t: shrink_constants(gen_ta(GenSpec(seed=t[0], max_clocks=1, max_constant=4)), t[1])
)


@pytest.fixture(scope="session")
def example_pta():
    return running_example()


def q(x) -> Fraction:
    return Fraction(x)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
