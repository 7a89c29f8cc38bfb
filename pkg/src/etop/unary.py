"""Ultimately periodic sets of naturals and unary languages of region automata."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .regions import RegionAutomaton, RegionGraph

DEFAULT_SUBSET_CAP = 1 << 22


class SubsetCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"subset construction cap of {cap} exceeded")


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass(frozen=True)
class UPSet:
    """``k`` is a member iff ``prefix[k]`` (``k < T``) or ``cycle[(k - T) % p]``.

    Instances are always canonical: the cycle is primitive and the prefix
    has no tail that the cycle could absorb.  Equal sets therefore compare
    equal with ``==``.
    """

    prefix: tuple[bool, ...] = ()
    cycle: tuple[bool, ...] = (False,)

    def __post_init__(self):
        prefix = [bool(b) for b in self.prefix]
        cycle = [bool(b) for b in self.cycle]
        if not cycle:
            raise ValueError("cycle must be non-empty")
        p = len(cycle)
        for d in _divisors(p):
            if all(cycle[i] == cycle[i % d] for i in range(p)):
                cycle = cycle[:d]
                break
        while prefix and prefix[-1] == cycle[-1]:
            prefix.pop()
            cycle = [cycle[-1]] + cycle[:-1]
        object.__setattr__(self, "prefix", tuple(prefix))
        object.__setattr__(self, "cycle", tuple(cycle))

    @classmethod
    def from_function(cls, f: Callable[[int], bool], start: int, period: int) -> "UPSet":
        """Build from a membership predicate that is ``period``-periodic from ``start`` on."""
        return cls(tuple(f(k) for k in range(start)), tuple(f(k) for k in range(start, start + period)))

    @classmethod
    def finite(cls, members: Iterable[int]) -> "UPSet":
        members = set(members)
        top = max(members, default=-1) + 1
        return cls(tuple(k in members for k in range(top)), (False,))

    @property
    def start(self) -> int:
        return len(self.prefix)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def __contains__(self, k: int) -> bool:
        if k < 0:
            return False
        if k < len(self.prefix):
            return self.prefix[k]
        return self.cycle[(k - len(self.prefix)) % len(self.cycle)]

    def is_empty(self) -> bool:
        return not any(self.prefix) and not any(self.cycle)

    def is_finite(self) -> bool:
        return not any(self.cycle)

    def horizon(self, other: "UPSet") -> tuple[int, int]:
        return max(self.start, other.start), math.lcm(self.period, other.period)

    def shifted(self, n: int) -> "UPSet":
        """``{k + n : k in self}``."""
        return UPSet((False,) * n + self.prefix, self.cycle)

    def members_below(self, bound: int) -> list[int]:
        return [k for k in range(bound) if k in self]

    def __repr__(self):
        bits = lambda t: "".join("1" if b else "0" for b in t)
        return f"UPSet({bits(self.prefix)!r}, {bits(self.cycle)!r})"


def _combine(a: UPSet, b: UPSet, op) -> UPSet:
    start, period = a.horizon(b)
    return UPSet.from_function(lambda k: op(k in a, k in b), start, period)


def up_union(a: UPSet, b: UPSet) -> UPSet:
    return _combine(a, b, lambda x, y: x or y)


def up_intersect(a: UPSet, b: UPSet) -> UPSet:
    return _combine(a, b, lambda x, y: x and y)


def up_difference(a: UPSet, b: UPSet) -> UPSet:
    return _combine(a, b, lambda x, y: x and not y)


def up_first_diff(a: UPSet, b: UPSet, mode: str = "includes") -> int | None:
    """Least ``k`` in ``a - b`` (``mode="includes"``) or in the symmetric difference."""
    start, period = a.horizon(b)
    for k in range(start + period):
        x, y = k in a, k in b
        if (x and not y) if mode == "includes" else (x != y):
            return k
    return None


def up_includes(a: UPSet, b: UPSet) -> bool:
    """Whether ``a`` is a subset of ``b``."""
    return up_first_diff(a, b, "includes") is None


def up_equals(a: UPSet, b: UPSet) -> bool:
    return up_first_diff(a, b, "equals") is None


# -- lasso of the determinised unary automaton --------------------------------


@dataclass(frozen=True)
class Lasso:
    """Subsets reached after k ticks: ``sets[k]`` for k < len(sets), looping back to ``loop``."""

    sets: tuple[frozenset[int], ...]
    loop: int

    def bits(self, accepting: frozenset[int] | set[int]) -> UPSet:
        flags = [not s.isdisjoint(accepting) for s in self.sets]
        return UPSet(tuple(flags[: self.loop]), tuple(flags[self.loop :]))

    @property
    def subset_count(self) -> int:
        return len(self.sets)


def _closure(graph: RegionGraph, seeds: Iterable[int]) -> frozenset[int]:
    seen = set(seeds)
    stack = list(seen)
    eps = graph.eps
    while stack:
        s = stack.pop()
        for d in eps[s]:
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return frozenset(seen)


def lasso(graph: RegionGraph, cap: int = DEFAULT_SUBSET_CAP) -> Lasso:
    """Subset construction restricted to the single letter ``tick``."""
    if graph._lasso is not None:
        return graph._lasso
    if graph.size == 0:
        result = Lasso((frozenset(),), 0)
        graph._lasso = result
        return result
    tick = graph.tick
    current = _closure(graph, [0])
    seen = {current: 0}
    sets = [current]
    while True:
        seeds: set[int] = set()
        for s in current:
            if tick[s]:
                seeds.update(tick[s])
        nxt = _closure(graph, seeds)
        if nxt in seen:
            result = Lasso(tuple(sets), seen[nxt])
            graph._lasso = result
            return result
        if len(sets) >= cap:
            raise SubsetCapExceeded(cap)
        seen[nxt] = len(sets)
        sets.append(nxt)
        current = nxt


def unary_language(ra: RegionAutomaton, which: str, cap: int = DEFAULT_SUBSET_CAP) -> UPSet:
    """Tick counts accepted by ``ra``.

    ``which="frac"``: k such that the final is reached with duration in
    ``(k, k + 1)``.  ``which="exact"``: integer durations k at which the
    final is reached.
    """
    lz = lasso(ra.graph, cap)
    if which == "frac":
        return lz.bits(ra.frac)
    if which == "exact":
        return up_union(lz.bits(ra.exact0), lz.bits(ra.exact1).shifted(1))
    raise ValueError(f"which must be 'exact' or 'frac', not {which!r}")
