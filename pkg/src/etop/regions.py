"""Regions, the region graph and the tick-lettered region automaton.

Internally a region is the tuple ``(location, classes, ranks)``:

* ``classes[i]`` encodes clock ``i`` relative to its ceiling ``c``:
  ``2n`` means exactly ``n`` (``n <= c``), ``2n + 1`` means the open
  interval ``(n, n + 1)`` (``n < c``) and ``2c + 1`` means "above ``c``".
  Even classes therefore carry a zero fractional part.
* ``ranks[i]`` orders the clocks in open intervals by fractional part
  (``1`` = smallest, equal ranks = equal fractions); it is ``0`` for every
  other clock.

:class:`Region` is the readable form of the same information.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .model import ModelError, TimedSystem

DEFAULT_STATE_CAP = 2_000_000


class RegionCapExceeded(RuntimeError):
    """The region exploration hit its configured state cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"region state cap of {cap} exceeded")


@dataclass(frozen=True)
class Region:
    location: int
    ints: tuple[int, ...]  # c_i + 1 stands for "above c_i"
    zero: tuple[bool, ...]
    order: tuple[frozenset[int], ...]  # increasing fractional parts


def ceilings(sys: TimedSystem) -> tuple[int, ...]:
    """Largest constant each clock is compared with (0 if never compared)."""
    if sys.is_parametric or sys.denom != 1:
        raise ModelError("ceilings need a parameter-free system with integer constants")
    c = [0] * len(sys.clocks)
    for a in sys.atoms():
        c[a.clock] = max(c[a.clock], int(a.value))
    return tuple(c)


def local_ceilings(sys: TimedSystem, floor: Sequence[int] = ()) -> list[tuple[int, ...]]:
    """Per-location ceilings: the largest constant a clock can still be compared with.

    A clock's constant counts at location ``l`` if it appears in the
    invariant of ``l``, in a guard leaving ``l``, or at a location reachable
    from ``l`` without resetting that clock.  Regions refined only up to
    these ceilings are still bisimilar.  ``floor`` gives per-clock minima.
    """
    glob = ceilings(sys)
    n = len(sys.clocks)
    base = [list(floor) + [0] * (n - len(floor)) for _ in sys.locations]
    for l, inv in enumerate(sys.invariants):
        for a in inv.atoms:
            base[l][a.clock] = max(base[l][a.clock], int(a.value))
    for e in sys.edges:
        for a in e.guard.atoms:
            base[e.source][a.clock] = max(base[e.source][a.clock], int(a.value))
        for a in sys.invariants[e.target].atoms:
            if a.clock not in e.resets:
                base[e.source][a.clock] = max(base[e.source][a.clock], int(a.value))
    changed = True
    while changed:
        changed = False
        for e in sys.edges:
            src, dst = base[e.source], base[e.target]
            for i in range(n):
                if i not in e.resets and dst[i] > src[i]:
                    src[i] = dst[i]
                    changed = True
    return [tuple(min(c, max(g, f)) for c, g, f in zip(row, glob, list(floor) + [0] * n)) for row in base]


# -- key <-> Region -----------------------------------------------------------


def _compact(ranks: list[int]) -> tuple[int, ...]:
    used = sorted(set(ranks))
    if used[0] != 0:
        used.insert(0, 0)
    if used[-1] == len(used) - 1:
        return tuple(ranks)
    remap = {r: i for i, r in enumerate(used)}
    return tuple([remap[r] for r in ranks])


def key_to_region(key, ceil: Sequence[int]) -> Region:
    loc, classes, ranks = key
    ints, zero = [], []
    for k, c in zip(classes, ceil):
        if k == 2 * c + 1:
            ints.append(c + 1)
            zero.append(False)
        else:
            ints.append(k // 2)
            zero.append(k % 2 == 0)
    m = max(ranks, default=0)
    order = tuple(frozenset(i for i, r in enumerate(ranks) if r == j) for j in range(1, m + 1))
    return Region(loc, tuple(ints), tuple(zero), order)


def region_to_key(region: Region, ceil: Sequence[int]):
    classes, ranks = [], [0] * len(ceil)
    for i, (n, z, c) in enumerate(zip(region.ints, region.zero, ceil)):
        classes.append(2 * c + 1 if n > c else 2 * n + (0 if z else 1))
    for j, cls in enumerate(region.order, start=1):
        for i in cls:
            ranks[i] = j
    return (region.location, tuple(classes), tuple(ranks))


def region_of(location: int, valuation: Sequence, ceil: Sequence[int]) -> Region:
    """The region containing a concrete (non-negative, rational) valuation."""
    vals = [Fraction(v) for v in valuation]
    if any(v < 0 for v in vals):
        raise ValueError("clock values must be non-negative")
    ints, zero, fracs = [], [], {}
    for i, (v, c) in enumerate(zip(vals, ceil)):
        if v > c:
            ints.append(c + 1)
            zero.append(False)
            continue
        n = math.floor(v)
        ints.append(n)
        zero.append(v == n)
        if v != n:
            fracs.setdefault(v - n, set()).add(i)
    order = tuple(frozenset(fracs[f]) for f in sorted(fracs))
    return Region(location, tuple(ints), tuple(zero), order)


def sample_valuation(region: Region, ceil: Sequence[int], rng=None) -> list[Fraction]:
    """A concrete valuation inside ``region`` (random if ``rng`` is given)."""
    m = len(region.order)
    if rng is None:
        fr = [Fraction(j, m + 1) for j in range(1, m + 1)]
    else:
        picks = sorted(rng.sample(range(1, 1000), m))
        fr = [Fraction(p, 1000) for p in picks]
    vals = []
    for i, (n, z, c) in enumerate(zip(region.ints, region.zero, ceil)):
        if n > c:
            extra = Fraction(rng.randint(0, 999), 1000) if rng else Fraction(1, 2)
            vals.append(c + 1 + extra)
        elif z:
            vals.append(Fraction(n))
        else:
            j = next(j for j, cls in enumerate(region.order) if i in cls)
            vals.append(n + fr[j])
    return vals


# -- compiled constraints -------------------------------------------------------


def _allowed(op: str, value: int, c: int) -> tuple[bool, ...]:
    """Truth table of ``x op value`` over the 2c + 2 classes of a clock."""
    out = []
    for k in range(2 * c + 2):
        if k == 2 * c + 1:
            out.append(op in (">", ">="))
        elif k % 2 == 0:
            x = k // 2
            out.append({"<": x < value, "<=": x <= value, "==": x == value, ">=": x >= value, ">": x > value}[op])
        else:
            n = k // 2  # x in (n, n + 1)
            out.append({"<": n < value, "<=": n < value, "==": False, ">=": n >= value, ">": n >= value}[op])
    return tuple(out)


def _compile_guard(guard, ceil) -> tuple[tuple[int, tuple[bool, ...]], ...]:
    tables: dict[int, list[bool]] = {}
    for a in guard.atoms:
        t = _allowed(a.op, int(a.value), ceil[a.clock])
        prev = tables.get(a.clock)
        tables[a.clock] = list(t) if prev is None else [p and q for p, q in zip(prev, t)]
    return tuple((i, tuple(t)) for i, t in sorted(tables.items()))


def _sat(compiled, classes) -> bool:
    for i, table in compiled:
        if not table[classes[i]]:
            return False
    return True


@dataclass
class RegionGraph:
    """Reachable region graph of a tick-augmented system.

    States are numbered densely; ``keys[s]`` is the internal key of state
    ``s``.  ``eps[s]`` and ``tick[s]`` are successor lists.  Exploration
    stops at every location in ``stops``.
    """

    sys: TimedSystem
    ceil: tuple[int, ...]
    tick_clock: int
    stops: frozenset[int]
    keys: list = field(default_factory=list)
    eps: list[list[int]] = field(default_factory=list)
    tick: list[list[int]] = field(default_factory=list)
    local: list[tuple[int, ...]] = field(default_factory=list)
    _lasso: object = None

    def ceil_at(self, loc: int) -> tuple[int, ...]:
        return self.local[loc] if self.local else self.ceil

    @property
    def size(self) -> int:
        return len(self.keys)

    def acceptance(self, final: int) -> tuple[set[int], set[int], set[int]]:
        """States at ``final`` with tick clock = 0, = 1 and in (0, 1)."""
        at0, at1, frac = set(), set(), set()
        t = self.tick_clock
        for s, (loc, classes, _) in enumerate(self.keys):
            if loc != final:
                continue
            k = classes[t]
            if k == 0:
                at0.add(s)
            elif k == 2:
                at1.add(s)
            else:
                frac.add(s)
        return at0, at1, frac


def build_region_graph(
    sys: TimedSystem,
    stops: Iterable[int],
    tick_clock: int | None = None,
    cap: int = DEFAULT_STATE_CAP,
) -> RegionGraph:
    """Explore the reachable regions of ``sys``.

    Delay successors and non-tick discrete edges become ε-transitions;
    edges resetting ``tick_clock`` (default: the last clock) become ``tick``.
    The unbounded self-loop of the region graph is omitted: it adds nothing
    to reachability.
    """
    ceil = ceilings(sys)
    n = len(sys.clocks)
    if tick_clock is None:
        tick_clock = n - 1
    stops = frozenset(stops)
    floor = [0] * n
    floor[tick_clock] = 1  # acceptance reads tick = 0 / 1 / fractional
    local = local_ceilings(sys, floor)
    g = RegionGraph(sys, ceil, tick_clock, stops, local=local)
    tops = [tuple(2 * c + 1 for c in row) for row in local]
    invs = [_compile_guard(inv, local[l]) for l, inv in enumerate(sys.invariants)]
    out: list[list] = [[] for _ in sys.locations]
    for e in sys.edges:
        # classes above the target's ceilings collapse into its top class
        clamp = tuple(i for i in range(n) if i not in e.resets and tops[e.target][i] < tops[e.source][i])
        out[e.source].append(
            (_compile_guard(e.guard, local[e.source]), tuple(sorted(e.resets)), e.target, tick_clock in e.resets, clamp)
        )

    init = (sys.init, (0,) * n, (0,) * n)
    if not _sat(invs[sys.init], init[1]):
        return g
    index = {init: 0}
    g.keys.append(init)
    g.eps.append([])
    g.tick.append([])
    queue = deque([0])

    def visit(key) -> int:
        s = index.get(key)
        if s is None:
            s = len(g.keys)
            if s >= cap:
                raise RegionCapExceeded(cap)
            index[key] = s
            g.keys.append(key)
            g.eps.append([])
            g.tick.append([])
            queue.append(s)
        return s

    while queue:
        s = queue.popleft()
        loc, classes, ranks = g.keys[s]
        if loc in stops:
            continue
        top = tops[loc]
        # delay successor
        zero = [i for i in range(n) if classes[i] % 2 == 0]
        nxt = None
        if zero:
            cl = list(classes)
            rk = [r + 1 if r else 0 for r in ranks]
            capped = False
            for i in zero:
                if classes[i] == top[i] - 1:
                    cl[i] = top[i]
                    rk[i] = 0
                    capped = True
                else:
                    cl[i] += 1
                    rk[i] = 1
            nxt = (loc, tuple(cl), _compact(rk) if capped else tuple(rk))
        else:
            m = max(ranks) if ranks else 0
            if m:
                cl = list(classes)
                rk = list(ranks)
                for i in range(n):
                    if ranks[i] == m:
                        cl[i] += 1
                        rk[i] = 0
                nxt = (loc, tuple(cl), tuple(rk))
        if nxt is not None and _sat(invs[loc], nxt[1]):
            g.eps[s].append(visit(nxt))
        # discrete successors
        for guard, resets, target, is_tick, clamp in out[loc]:
            if not _sat(guard, classes):
                continue
            if resets or clamp:
                cl = list(classes)
                rk = list(ranks)
                for i in resets:
                    cl[i] = 0
                    rk[i] = 0
                ttop = tops[target]
                for i in clamp:
                    if cl[i] >= ttop[i]:
                        cl[i] = ttop[i]
                        rk[i] = 0
                key = (target, tuple(cl), _compact(rk))
            else:
                key = (target, classes, ranks)
            if not _sat(invs[target], key[1]):
                continue
            (g.tick if is_tick else g.eps)[s].append(visit(key))
    return g


@dataclass
class RegionAutomaton:
    """Region automaton of a tick-augmented system for one selected final."""

    graph: RegionGraph
    final: int
    exact0: frozenset[int]
    exact1: frozenset[int]
    frac: frozenset[int]

    def region(self, s: int) -> Region:
        key = self.graph.keys[s]
        return key_to_region(key, self.graph.ceil_at(key[0]))

    @property
    def states(self) -> list[Region]:
        return [self.region(s) for s in range(self.graph.size)]

    @property
    def initial(self) -> Region:
        return self.region(0)

    @property
    def transitions(self) -> list[tuple[Region, str, Region]]:
        out = []
        for s in range(self.graph.size):
            for d in self.graph.eps[s]:
                out.append((self.region(s), "eps", self.region(d)))
            for d in self.graph.tick[s]:
                out.append((self.region(s), "tick", self.region(d)))
        return out

    @property
    def accept_exact(self) -> dict[Region, int]:
        acc = {self.region(s): 1 for s in self.exact1}
        acc.update({self.region(s): 0 for s in self.exact0})
        return acc

    @property
    def accept_frac(self) -> set[Region]:
        return {self.region(s) for s in self.frac}

    def describe(self, r: Region) -> str:
        sys = self.graph.sys
        parts = []
        for i, name in enumerate(sys.clocks):
            n, c = r.ints[i], self.graph.ceil_at(r.location)[i]
            if n > c:
                parts.append(f"{name}>{c}")
            elif r.zero[i]:
                parts.append(f"{name}={n}")
            else:
                parts.append(f"{name}∈({n},{n + 1})")
        if r.order:
            parts.append(" < ".join("{" + ",".join(sys.clocks[i] for i in sorted(cls)) + "}" for cls in r.order))
        return sys.locations[r.location] + "\\n" + " ".join(parts)


def automaton_for(graph: RegionGraph, final: int) -> RegionAutomaton:
    at0, at1, frac = graph.acceptance(final)
    return RegionAutomaton(graph, final, frozenset(at0), frozenset(at1), frozenset(frac))


def region_automaton(
    sys: TimedSystem,
    selected_final: int,
    tick_clock: int | None = None,
    cap: int = DEFAULT_STATE_CAP,
) -> RegionAutomaton:
    """Region automaton of ``sys`` accepting at ``selected_final``.

    ``sys`` must be tick-augmented (the tick clock defaults to the last
    clock) with integer constants, and ``selected_final`` must have no
    outgoing edges.
    """
    if any(e.source == selected_final for e in sys.edges):
        raise ModelError("the selected final location must not have outgoing edges")
    graph = build_region_graph(sys, {selected_final}, tick_clock, cap)
    return automaton_for(graph, selected_final)
