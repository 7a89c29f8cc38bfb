"""Timed-automaton to timed-automaton constructions used by the analyses."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

from .model import TRUE, Edge, Guard, ModelError, TimedSystem, atom


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
BoundValue = Union[Fraction, _Infinity]


def as_bound(value) -> BoundValue:
    """Parse ``3``, ``"3/2"``, ``"2.5"``, ``"inf"`` or :data:`INF` into a bound."""
    if value is INF or (isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity")):
        return INF
    if isinstance(value, float):
        raise TypeError("bounds must be exact; pass a Fraction or a string")
    b = Fraction(value)
    if b < 0:
        raise ValueError(f"bound must be non-negative, got {b}")
    return b


def _require_concrete(sys: TimedSystem, what: str):
    if sys.is_parametric:
        raise ModelError(f"{what} requires a parameter-free system; instantiate it first")


@dataclass(frozen=True)
class ClassifiedSystem:
    product: TimedSystem
    final_secret: int
    final_expired: int
    final_public: int
    lag_clock: int

    @property
    def finals(self) -> tuple[int, int, int]:
        return (self.final_secret, self.final_expired, self.final_public)


def absorb_final(sys: TimedSystem) -> TimedSystem:
    """Drop every edge leaving the final location."""
    _require_concrete(sys, "absorb_final")
    edges = tuple(e for e in sys.edges if e.source != sys.final)
    if len(edges) == len(sys.edges):
        return sys
    return replace(sys, edges=edges)


def classify(sys: TimedSystem, delta) -> ClassifiedSystem:
    """Split arrivals at the final location into secret, expired and public ones.

    The product tracks whether the private location was visited and a fresh
    clock measuring the time since its *last* entrance.  Locations of the
    product are named ``loc`` (not yet visited) and ``loc+`` (visited).
    """
    _require_concrete(sys, "classify")
    delta = as_bound(delta)
    if delta is not INF and (delta * sys.denom).denominator != 1:
        raise ModelError(f"delta {delta} is not on the 1/{sys.denom} grid of the system; scale first")
    sys = absorb_final(sys)
    y = len(sys.clocks)
    clocks = sys.clocks + (sys.fresh_name("lag"),)

    index: dict[tuple[int, bool], int] = {}
    names: list[str] = []
    invariants: list[Guard] = []
    edges: list[Edge] = []
    start = (sys.init, sys.init == sys.private)
    stack = [start]

    def node(key):
        if key not in index:
            index[key] = len(names)
            loc, seen = key
            names.append(sys.locations[loc] + ("+" if seen else ""))
            invariants.append(sys.invariants[loc])
            stack.append(key)
        return index[key]

    node(start)
    pending: list[tuple[int, Edge, bool]] = []
    while stack:
        key = stack.pop()
        loc, seen = key
        for e in sys.outgoing(loc):
            if e.target == sys.final:
                pending.append((index[key], e, seen))
                continue
            if e.target == sys.private:
                tgt = node((e.target, True))
                resets = e.resets | {y}
            else:
                tgt = node((e.target, seen))
                resets = e.resets
            edges.append(Edge(index[key], e.guard, e.action, resets, tgt))

    fin_name = sys.locations[sys.final]
    fs, fe, fp = (len(names) + k for k in range(3))
    names += [f"{fin_name}!secret", f"{fin_name}!expired", f"{fin_name}!public"]
    invariants += [sys.invariants[sys.final]] * 3
    for src, e, seen in pending:
        if not seen:
            edges.append(Edge(src, e.guard, e.action, e.resets, fp))
        elif delta is INF:
            edges.append(Edge(src, e.guard & Guard((atom(y, ">=", 0),)), e.action, e.resets, fs))
        else:
            edges.append(Edge(src, e.guard & Guard((atom(y, "<=", delta),)), e.action, e.resets, fs))
            edges.append(Edge(src, e.guard & Guard((atom(y, ">", delta),)), e.action, e.resets, fe))

    priv = index.get((sys.private, True), 0)
    product = TimedSystem(
        name=f"{sys.name}_classified",
        locations=tuple(names),
        clocks=clocks,
        init=0,
        private=priv,
        final=fs,
        edges=tuple(edges),
        invariants=tuple(invariants),
        actions=sys.actions,
    )
    return ClassifiedSystem(product, fs, fe, fp, y)


def add_tick(sys: TimedSystem, skip=()) -> TimedSystem:
    """Add a clock reset by a ``tick`` self-loop every time unit.

    The new clock is appended last.  Locations in ``skip`` (typically the
    classification finals) get the ``t <= 1`` invariant but no self-loop.
    """
    _require_concrete(sys, "add_tick")
    if sys.denom != 1:
        raise ModelError(f"add_tick needs integer constants; scale the system by {sys.denom} first")
    t = len(sys.clocks)
    bound = Guard((atom(t, "<=", 1),))
    skip = set(skip)
    ticks = tuple(
        Edge(l, Guard((atom(t, "==", 1),)), "tick", frozenset({t}), l)
        for l in range(len(sys.locations))
        if l not in skip
    )
    return replace(
        sys,
        clocks=sys.clocks + (sys.fresh_name("tick"),),
        invariants=tuple(g & bound for g in sys.invariants),
        edges=sys.edges + ticks,
        actions=tuple(dict.fromkeys(sys.actions + ("tick",))),
    )


def _swap(sys: TimedSystem, delta, reverse: bool) -> TimedSystem:
    _require_concrete(sys, "swap_transform")
    delta = as_bound(delta)
    if delta is INF:
        raise ModelError("the swap construction needs a finite delta")
    sys = absorb_final(sys)
    n = len(sys.clocks)
    y, z = n, n + 1
    y_name = sys.fresh_name("y")
    clocks = sys.clocks + (y_name, sys.fresh_name("z", sys.clocks + (y_name,)))
    init2, priv2, final2 = (len(sys.locations) + k for k in range(3))
    locations = sys.locations + tuple(
        sys.fresh_name(base, sys.locations) + "'" for base in ("init", "priv", "final")
    )
    z0 = Guard((atom(z, "==", 0),))
    invariants = list(sys.invariants)
    invariants[sys.final] = invariants[sys.final] & z0
    invariants += [Guard((atom(y, "<=", delta + 1),)), z0, z0]

    edges = []
    for e in sys.edges:
        extra = {y, z} if e.target == sys.private else {z}
        edges.append(replace(e, resets=e.resets | extra))
    start_resets = set(range(n)) | {z}
    if sys.init == sys.private:
        start_resets.add(y)
    edges.append(Edge(init2, Guard((atom(y, "==", delta + 1),)), "swap", frozenset(start_resets), sys.init))
    late = z0 & Guard((atom(y, ">", delta),))
    early = z0 & Guard((atom(y, "<=", delta),))
    if not reverse:
        edges += [
            Edge(sys.final, late, "swap", frozenset(), priv2),
            Edge(sys.final, early, "swap", frozenset(), final2),
        ]
    else:
        edges += [
            Edge(sys.final, early, "swap", frozenset(), priv2),
            Edge(sys.final, late, "swap", frozenset(), final2),
            Edge(sys.final, late, "swap", frozenset(), priv2),
        ]
    edges.append(Edge(priv2, z0, "swap", frozenset(), final2))
    return TimedSystem(
        name=f"{sys.name}_{'swaprev' if reverse else 'swap'}",
        locations=locations,
        clocks=clocks,
        init=init2,
        private=priv2,
        final=final2,
        edges=tuple(edges),
        invariants=tuple(invariants),
    )


def swap_transform(sys: TimedSystem, delta) -> TimedSystem:
    """Build the automaton whose secret and non-secret runs are those of ``sys`` swapped.

    Durations are shifted by ``delta + 1``.  ``sys`` is fully opaque for
    ``delta`` iff both ``sys`` and the result are weakly opaque for it.
    """
    return _swap(sys, delta, reverse=False)


def swap_transform_reverse(sys: TimedSystem, delta) -> TimedSystem:
    """Variant whose full opacity for ``delta`` equals weak opacity of ``sys``."""
    return _swap(sys, delta, reverse=True)
