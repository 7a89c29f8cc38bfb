"""Decision, computation and emptiness of expiring execution-time opacity.

Secret durations ``S`` (private location entered at most delta before
completion), expired durations ``E`` (entered earlier than that) and public
durations ``P`` (never entered) are compared: *weak* opacity is
``S <= E | P`` and *full* opacity is ``S == E | P``.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .durations import Cell, DurationSet, Limits, Stats, ds_first_diff, ds_union, duration_sets
from .model import TimedSystem, instantiate, scale
from .transforms import INF, BoundValue, as_bound, classify

MODES = ("weak", "full")


@dataclass(frozen=True)
class ClassSets:
    secret: DurationSet
    expired: DurationSet
    public: DurationSet
    stats: Stats = field(compare=False, default_factory=Stats)

    @property
    def non_secret(self) -> DurationSet:
        return ds_union(self.expired, self.public)


@lru_cache(maxsize=512)
def _class_sets(sys: TimedSystem, delta: BoundValue, limits: Limits) -> ClassSets:
    q = sys.denom if delta is INF else math.lcm(sys.denom, delta.denominator)
    work = scale(sys, q)
    cs = classify(work, delta if delta is INF else delta * q)
    sets, stats = duration_sets(cs.product, cs.finals, limits)

    def back(ds: DurationSet) -> DurationSet:
        # durations of the scaled system, read in the original time unit
        return DurationSet(ds.points, ds.opens, ds.denom * q)

    return ClassSets(back(sets[cs.final_secret]), back(sets[cs.final_expired]), back(sets[cs.final_public]), stats)


def class_sets(sys: TimedSystem, delta, limits: Limits = Limits()) -> ClassSets:
    """Secret, expired and public duration sets of a parameter-free system."""
    return _class_sets(sys, as_bound(delta), limits)


@dataclass(frozen=True)
class Witness:
    """A grid cell of durations lying on exactly one side of the comparison."""

    cell: Cell
    side: str  # "secret" or "non-secret"

    def to_json(self) -> dict:
        return {
            "kind": self.cell.kind,
            "lo": _q(self.cell.lo),
            "hi": _q(self.cell.hi),
            "side": self.side,
        }


@dataclass(frozen=True)
class Verdict:
    opaque: bool
    witness: Witness | None = None
    stats: Stats = field(compare=False, default_factory=Stats)
    sets: ClassSets | None = field(compare=False, default=None)

    def __bool__(self):
        return self.opaque


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, not {mode!r}")


def decide(sys: TimedSystem, delta, mode: str = "weak", limits: Limits = Limits()) -> Verdict:
    """Is ``sys`` weakly / fully opaque for expiration date ``delta``?

    The system and ``delta`` are rescaled together onto an integer grid
    before the region construction, so any rational ``delta`` is handled
    directly.
    """
    _check_mode(mode)
    t0 = time.perf_counter()
    sets = class_sets(sys, delta, limits)
    rest = sets.non_secret
    witness = None
    cell = ds_first_diff(sets.secret, rest, "includes" if mode == "weak" else "equals")
    if cell is not None:
        side = "secret" if cell.representative in sets.secret else "non-secret"
        witness = Witness(cell, side)
    stats = Stats(sets.stats.regions, sets.stats.subsets, time.perf_counter() - t0)
    return Verdict(witness is None, witness, stats, sets)


def decide_real_band(sys: TimedSystem, k: int, mode: str = "weak", limits: Limits = Limits()) -> bool:
    """Verdict for every delta in the open band ``(k, k + 1)``.

    Computed at ``k + 1/2``.  For systems with integer constants the verdict
    is the same everywhere inside the band; for constants on a ``1/d`` grid
    the constant bands are ``(j/d, (j+1)/d)`` instead (see
    :func:`compute_weak_set`).
    """
    return decide(sys, Fraction(2 * k + 1, 2), mode, limits).opaque


@dataclass(frozen=True)
class DeltaSet:
    """Set of expiration dates: either everything or finitely many grid cells."""

    all: bool = False
    points: tuple[Fraction, ...] = ()
    cells: tuple[tuple[Fraction, Fraction], ...] = ()
    includes_infinity: bool = False
    denom: int = 1

    @classmethod
    def everything(cls) -> "DeltaSet":
        return cls(all=True, includes_infinity=True)

    def is_empty(self) -> bool:
        return not self.all and not self.points and not self.cells and not self.includes_infinity

    def __contains__(self, delta) -> bool:
        delta = as_bound(delta)
        if self.all:
            return True
        if delta is INF:
            return self.includes_infinity
        return delta in self.points or any(lo < delta < hi for lo, hi in self.cells)

    def __str__(self):
        if self.all:
            return "all delta in [0, inf]"
        items = [(p, _q(p)) for p in self.points] + [(lo, f"({_q(lo)}, {_q(hi)})") for lo, hi in self.cells]
        items.sort(key=lambda t: (t[0], t[1].startswith("(")))
        if self.includes_infinity:
            items.append((None, "inf"))
        return "{" + ", ".join(s for _, s in items) + "}" if items else "∅"

    def to_json(self):
        if self.all:
            return "ALL"
        return {
            "points": [_q(p) for p in self.points],
            "open_cells": [[_q(lo), _q(hi)] for lo, hi in self.cells],
            "includes_infinity": self.includes_infinity,
            "denom": self.denom,
        }


def _candidates(sys: TimedSystem, limits: Limits):
    """Grid index bound below which weak opacity may still hold, or None if weak at infinity."""
    top = class_sets(sys, INF, limits)
    cell = ds_first_diff(top.secret, top.public, "includes")
    if cell is None:
        return None
    return cell.index


def _grid_members(sys: TimedSystem, top: int, mode: str, limits: Limits) -> DeltaSet:
    d = sys.denom
    points = tuple(Fraction(j, d) for j in range(top + 1) if decide(sys, Fraction(j, d), mode, limits).opaque)
    cells = tuple(
        (Fraction(j, d), Fraction(j + 1, d))
        for j in range(top)
        if decide(sys, Fraction(2 * j + 1, 2 * d), mode, limits).opaque
    )
    return DeltaSet(points=points, cells=cells, denom=d)


def compute_weak_set(sys: TimedSystem, limits: Limits = Limits()) -> DeltaSet:
    """All expiration dates for which ``sys`` is weakly opaque.

    If ``sys`` is weakly opaque for an infinite delta it is so for every
    delta.  Otherwise the least duration ``t`` reachable only through the
    private location rules out every delta beyond ``t``; the finitely many
    grid points and open grid cells below it are tested one by one.
    """
    top = _candidates(sys, limits)
    if top is None:
        return DeltaSet.everything()
    return _grid_members(sys, top, "weak", limits)


def weak_emptiness(sys: TimedSystem, limits: Limits = Limits()) -> bool:
    """True iff no expiration date makes ``sys`` weakly opaque."""
    return compute_weak_set(sys, limits).is_empty()


@dataclass(frozen=True)
class FullEmptiness:
    nonempty: bool
    delta_set: DeltaSet | None
    exactness: str  # "exact" | "emptiness_only"

    def __iter__(self):
        return iter((self.nonempty, self.delta_set, self.exactness))


def full_emptiness(sys: TimedSystem, limits: Limits = Limits()) -> FullEmptiness:
    """Whether some expiration date makes ``sys`` fully opaque.

    When the weak set is finite, the full set is synthesised exactly.  When
    it is everything, full opacity for some delta is equivalent to full
    opacity at infinity, and only that answer is returned.
    """
    top = _candidates(sys, limits)
    if top is None:
        return FullEmptiness(decide(sys, INF, "full", limits).opaque, None, "emptiness_only")
    weak = _grid_members(sys, top, "weak", limits)
    points = tuple(p for p in weak.points if decide(sys, p, "full", limits).opaque)
    cells = tuple((lo, hi) for lo, hi in weak.cells if decide(sys, (lo + hi) / 2, "full", limits).opaque)
    full = DeltaSet(points=points, cells=cells, denom=weak.denom)
    return FullEmptiness(not full.is_empty(), full, "exact")


def decide_pta(pta: TimedSystem, valuation: Mapping[str, object], delta, mode: str = "weak",
               limits: Limits = Limits()) -> Verdict:
    return decide(instantiate(pta, valuation), delta, mode, limits)


@dataclass(frozen=True)
class SweepRow:
    valuation: tuple[tuple[str, Fraction], ...]
    delta: BoundValue
    opaque: bool | None
    error: str | None = None
    witness: Witness | None = None


@dataclass(frozen=True)
class SweepReport:
    params: tuple[str, ...]
    mode: str
    rows: tuple[SweepRow, ...]

    def lookup(self, valuation: Mapping[str, object], delta) -> SweepRow:
        key = tuple((p, Fraction(valuation[p])) for p in self.params)
        delta = as_bound(delta)
        for row in self.rows:
            if row.valuation == key and row.delta == delta:
                return row
        raise KeyError((valuation, delta))


def sweep(pta: TimedSystem, grid: Mapping[str, Sequence], deltas: Sequence, mode: str = "weak",
          limits: Limits = Limits()) -> SweepReport:
    """Decide opacity on every point of a finite parameter grid times ``deltas``.

    Iteration is lexicographic: parameters in declaration order, then delta
    in the given order.  Errors (such as exceeded caps) are recorded per row.
    """
    _check_mode(mode)
    missing = [p for p in pta.params if p not in grid]
    if missing:
        raise ValueError(f"no grid values for parameter(s) {', '.join(missing)}")
    axes = [sorted({Fraction(v) for v in grid[p]}) for p in pta.params]
    deltas = [as_bound(d) for d in deltas]
    rows = []
    for combo in itertools.product(*axes):
        val = tuple(zip(pta.params, combo))
        for delta in deltas:
            try:
                v = decide_pta(pta, dict(val), delta, mode, limits)
                rows.append(SweepRow(val, delta, v.opaque, witness=v.witness))
            except (RuntimeError, ValueError) as exc:
                rows.append(SweepRow(val, delta, None, error=str(exc)))
    return SweepReport(tuple(pta.params), mode, tuple(rows))


def grid_values(lo, hi, step) -> list[Fraction]:
    """``lo, lo + step, ...`` up to and including ``hi`` (exact rationals)."""
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    if step <= 0:
        raise ValueError("grid step must be positive")
    out = []
    x = lo
    while x <= hi:
        out.append(x)
        x += step
    return out
