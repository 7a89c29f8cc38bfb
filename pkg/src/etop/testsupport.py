"""Random timed automata and the bundled example models."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .model import TRUE, Edge, Guard, ModelError, TimedSystem, atom, validate

MODELS_DIR = Path(__file__).resolve().parents[2] / "models"

EXAMPLE_TEXT = """\
ta example;
clock x;
param p1, p2;
loc l0 init invariant x <= 3;
loc lpriv private invariant x <= p2;
loc lf final;
edge l0 -> lpriv when x >= p1 sync a;
edge l0 -> lf sync b;
edge lpriv -> lf sync c;
"""


@dataclass(frozen=True)
class GenSpec:
    """Bounds for :func:`gen_ta`.  The defaults keep region graphs small."""

    max_locations: int = 4
    max_clocks: int = 2
    max_constant: int = 5
    edge_density: float = 0.5
    strict_prob: float = 0.3
    invariant_prob: float = 0.3
    reset_prob: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.max_clocks < 1:
            raise ValueError("at least one clock is needed")
        if self.max_constant < 0:
            raise ValueError("max_constant must be non-negative")
        if not 0 <= self.edge_density <= 1:
            raise ValueError("edge_density must lie in [0, 1]")
        if not 0.3 <= self.strict_prob <= 1:
            raise ValueError("strict_prob must lie in [0.3, 1]")


def running_example() -> TimedSystem:
    """The running example as a parametric system (parameters p1, p2)."""
    from .modelfmt import parse_model

    return parse_model(EXAMPLE_TEXT, "example.ta")


def load_model(name: str) -> TimedSystem:
    """Parse ``models/<name>.ta`` from the repository."""
    from .modelfmt import parse_model

    path = MODELS_DIR / f"{name}.ta"
    return parse_model(path.read_text(), str(path))


def final_reachable(sys: TimedSystem) -> bool:
    """Graph reachability of the final location (guards ignored)."""
    seen, stack = {sys.init}, [sys.init]
    while stack:
        l = stack.pop()
        for e in sys.outgoing(l):
            if e.target not in seen:
                seen.add(e.target)
                stack.append(e.target)
    return sys.final in seen


def _random_guard(rng: random.Random, spec: GenSpec, n_clocks: int, upper: bool | None = None) -> Guard:
    atoms = []
    for c in range(n_clocks):
        if rng.random() >= 0.5:
            continue
        strict = rng.random() < spec.strict_prob
        if upper is None:
            kind = rng.choice(("lower", "upper", "eq"))
        else:
            kind = "upper" if upper else "lower"
        k = rng.randint(0, spec.max_constant)
        if kind == "eq":
            atoms.append(atom(c, "==", k))
        elif kind == "lower":
            atoms.append(atom(c, ">" if strict else ">=", k))
        else:
            if strict and k == 0:
                if spec.max_constant == 0:
                    strict = False
                else:
                    k = 1
            atoms.append(atom(c, "<" if strict else "<=", k))
    return Guard(tuple(atoms))


def _draw(rng: random.Random, spec: GenSpec) -> TimedSystem:
    n_loc = rng.randint(2, max(2, spec.max_locations))
    n_clk = rng.randint(1, spec.max_clocks)
    init, final = 0, n_loc - 1
    private = rng.randrange(n_loc - 1)
    invariants = []
    for l in range(n_loc):
        if l != final and rng.random() < spec.invariant_prob:
            invariants.append(_random_guard(rng, spec, n_clk, upper=True))
        else:
            invariants.append(TRUE)
    edges = []
    for s in range(n_loc - 1):
        for t in range(n_loc):
            if rng.random() < spec.edge_density:
                resets = frozenset(c for c in range(n_clk) if rng.random() < spec.reset_prob)
                edges.append(Edge(s, _random_guard(rng, spec, n_clk), f"a{len(edges)}", resets, t))
    return TimedSystem(
        name=f"gen{spec.seed}",
        locations=tuple(f"l{i}" for i in range(n_loc)),
        clocks=tuple(f"x{i}" for i in range(n_clk)),
        init=init,
        private=private,
        final=final,
        edges=tuple(edges),
        invariants=tuple(invariants),
    )


def gen_ta(spec: GenSpec = GenSpec(), attempts: int = 100) -> TimedSystem:
    """Deterministic random timed automaton for ``spec.seed``.

    Draws are repeated until the final location is reachable in the
    underlying graph; the last draw is returned if none is.  Systems always
    have at least two locations, with ``l0`` initial and the last one final.
    """
    rng = random.Random(spec.seed)
    sys = None
    for _ in range(attempts):
        sys = _draw(rng, spec)
        if final_reachable(sys):
            break
    problems = validate(sys)
    if problems:
        raise ModelError(f"generator produced an invalid system: {problems}")
    return sys


def example_at(p1, p2) -> TimedSystem:
    from .model import instantiate

    return instantiate(running_example(), {"p1": Fraction(p1), "p2": Fraction(p2)})
