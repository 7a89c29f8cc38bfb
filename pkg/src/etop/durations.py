"""Run-duration sets: unions of grid points and open grid cells.

A :class:`DurationSet` with denominator ``d`` contains ``k/d`` whenever
``k in points`` and the open cell ``(k/d, (k+1)/d)`` whenever ``k in opens``.
Timed automata with constants on the ``1/d`` grid have duration sets that
are unions of intervals with bounds on that grid, so the encoding is exact.

Comparisons work on the *interleaved* sequence ``point 0, cell 0, point 1,
cell 1, ...``: index ``2k`` is the point ``k``, index ``2k + 1`` the cell
after it.  The smallest differing index is the reported witness.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .model import TimedSystem, scale
from .regions import DEFAULT_STATE_CAP, automaton_for, build_region_graph
from .transforms import absorb_final, add_tick
from .unary import DEFAULT_SUBSET_CAP, UPSet, lasso, unary_language, up_first_diff, up_union


@dataclass(frozen=True)
class Limits:
    regions: int = DEFAULT_STATE_CAP
    subsets: int = DEFAULT_SUBSET_CAP


@dataclass(frozen=True)
class Cell:
    """One grid cell: the point ``k/denom`` or the open interval after it."""

    kind: str  # "point" | "open"
    index: int
    denom: int

    @property
    def lo(self) -> Fraction:
        return Fraction(self.index, self.denom)

    @property
    def hi(self) -> Fraction:
        return self.lo if self.kind == "point" else Fraction(self.index + 1, self.denom)

    @property
    def representative(self) -> Fraction:
        return self.lo if self.kind == "point" else (self.lo + self.hi) / 2

    def __str__(self):
        if self.kind == "point":
            return _q(self.lo)
        return f"({_q(self.lo)}, {_q(self.hi)})"


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class DurationSet:
    points: UPSet = field(default_factory=UPSet)
    opens: UPSet = field(default_factory=UPSet)
    denom: int = 1

    @classmethod
    def empty(cls, denom: int = 1) -> "DurationSet":
        return cls(UPSet(), UPSet(), denom)

    def interleaved(self) -> UPSet:
        start = 2 * max(self.points.start, self.opens.start)
        period = 2 * math.lcm(self.points.period, self.opens.period)
        return UPSet.from_function(
            lambda j: (j // 2 in self.points) if j % 2 == 0 else (j // 2 in self.opens), start, period
        )

    def is_empty(self) -> bool:
        return self.points.is_empty() and self.opens.is_empty()

    def __contains__(self, value) -> bool:
        x = Fraction(value) * self.denom
        if x < 0:
            return False
        if x.denominator == 1:
            return int(x) in self.points
        return math.floor(x) in self.opens

    def intervals(self, horizon: int | None = None) -> list[tuple[Fraction, bool, Fraction | None, bool]]:
        """Maximal intervals ``(lo, lo_closed, hi, hi_closed)`` up to ``horizon`` cells.

        ``hi`` is ``None`` for an interval that never ends (cycle of all ones).
        """
        bits = self.interleaved()
        unbounded = all(bits.cycle)
        if horizon is None:
            horizon = bits.start + bits.period
            if bits.is_finite() or unbounded:
                horizon = bits.start + 1
        out = []
        j = 0
        while j < horizon:
            if j not in bits:
                j += 1
                continue
            j0 = j
            while j < horizon and j in bits:
                j += 1
            j1 = j - 1
            lo = Fraction(j0 // 2, self.denom)
            hi = Fraction(j1 // 2 + (j1 % 2), self.denom)
            if unbounded and j >= horizon:
                out.append((lo, j0 % 2 == 0, None, False))
            else:
                out.append((lo, j0 % 2 == 0, hi, j1 % 2 == 0))
        return out

    def periodic_tail(self) -> tuple[Fraction, Fraction] | None:
        """``(start, period)`` in time units if the set is infinite and not a half-line."""
        bits = self.interleaved()
        if bits.is_finite() or all(bits.cycle):
            return None
        start = Fraction(bits.start, 2 * self.denom)
        return start, Fraction(bits.period, 2 * self.denom)

    def __str__(self):
        parts = []
        for lo, lc, hi, hc in self.intervals():
            if hi is None:
                parts.append(f"{'[' if lc else '('}{_q(lo)}, inf)")
            elif hi == lo:
                parts.append("{" + _q(lo) + "}")
            else:
                parts.append(f"{'[' if lc else '('}{_q(lo)}, {_q(hi)}{']' if hc else ')'}")
        text = " ∪ ".join(parts) if parts else "∅"
        tail = self.periodic_tail()
        if tail:
            text += f" (repeating every {_q(tail[1])} from {_q(tail[0])})"
        return text

    def to_json(self) -> dict:
        tail = self.periodic_tail()
        return {
            "denom": self.denom,
            "intervals": [
                {"lo": _q(lo), "lo_closed": lc, "hi": None if hi is None else _q(hi), "hi_closed": hc}
                for lo, lc, hi, hc in self.intervals()
            ],
            "repeat": None if tail is None else {"from": _q(tail[0]), "period": _q(tail[1])},
        }


def ds_rescale(a: DurationSet, new_denom: int) -> DurationSet:
    """Same real set on the finer ``1/new_denom`` grid."""
    if new_denom % a.denom:
        raise ValueError(f"{a.denom} does not divide {new_denom}")
    m = new_denom // a.denom
    if m == 1:
        return a
    start = m * max(a.points.start, a.opens.start)
    period = m * math.lcm(a.points.period, a.opens.period)
    points = UPSet.from_function(lambda j: (j // m in a.points) if j % m == 0 else (j // m in a.opens), start, period)
    opens = UPSet.from_function(lambda j: j // m in a.opens, start, period)
    return DurationSet(points, opens, new_denom)


def _aligned(a: DurationSet, b: DurationSet) -> tuple[DurationSet, DurationSet]:
    d = math.lcm(a.denom, b.denom)
    return ds_rescale(a, d), ds_rescale(b, d)


def ds_union(a: DurationSet, b: DurationSet) -> DurationSet:
    a, b = _aligned(a, b)
    return DurationSet(up_union(a.points, b.points), up_union(a.opens, b.opens), a.denom)


def ds_first_diff(a: DurationSet, b: DurationSet, mode: str = "includes") -> Cell | None:
    """Least cell of ``a - b`` (``mode="includes"``) or of the symmetric difference."""
    a, b = _aligned(a, b)
    j = up_first_diff(a.interleaved(), b.interleaved(), mode)
    if j is None:
        return None
    return Cell("point" if j % 2 == 0 else "open", j // 2, a.denom)


def ds_includes(a: DurationSet, b: DurationSet) -> bool:
    """Whether ``a`` is a subset of ``b``."""
    return ds_first_diff(a, b, "includes") is None


def ds_equals(a: DurationSet, b: DurationSet) -> bool:
    return ds_first_diff(a, b, "equals") is None


# -- pipeline -----------------------------------------------------------------


@dataclass
class Stats:
    regions: int = 0
    subsets: int = 0
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"regions": self.regions, "subsets": self.subsets, "seconds": round(self.seconds, 4)}


def duration_sets(
    sys: TimedSystem, finals, limits: Limits = Limits()
) -> tuple[dict[int, DurationSet], Stats]:
    """Duration sets of runs reaching each location of ``finals``.

    One region automaton is shared by all the requested finals; each of them
    is made absorbing.  Results are in the time units of ``sys``.
    """
    t0 = time.perf_counter()
    finals = list(finals)
    q = sys.denom
    work = scale(sys, q)
    work = absorb_final(work)
    stop = set(finals)
    if any(e.source in stop for e in work.edges):
        work = work.with_(edges=tuple(e for e in work.edges if e.source not in stop))
    ticked = add_tick(work, skip=stop)
    graph = build_region_graph(ticked, stop, cap=limits.regions)
    out = {}
    for f in finals:
        ra = automaton_for(graph, f)
        out[f] = DurationSet(unary_language(ra, "exact", limits.subsets), unary_language(ra, "frac", limits.subsets), q)
    lz = lasso(graph, limits.subsets)
    return out, Stats(graph.size, lz.subset_count, time.perf_counter() - t0)


def duration_set(sys: TimedSystem, selected_final: int | None = None, limits: Limits = Limits()) -> DurationSet:
    """Durations of runs of ``sys`` reaching ``selected_final`` (default: the final)."""
    f = sys.final if selected_final is None else selected_final
    sets, _ = duration_sets(sys, [f], limits)
    return sets[f]
