"""Brute-force duration sampling on a discrete time grid.

The oracle explores runs whose delays are multiples of ``1/g``.  Every run
it finds is a genuine run of the timed automaton, so what it reports is an
under-approximation of the real duration sets; with a fine enough grid it
hits every point and cell the region pipeline claims.  It shares no code
with the region construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .model import ModelError, TimedSystem
from .transforms import INF, as_bound

PUBLIC = None


@dataclass
class SampledDurations:
    """Arrivals at the final location on the ``1/g`` grid up to time ``H``.

    ``memberships[k]`` holds the lags (in grid units) of private runs
    arriving at time ``k/g`` plus ``None`` if a public run arrives then.
    Lags larger than ``lag_cap`` are stored as ``lag_cap + 1``.
    """

    g: int
    horizon: int
    lag_cap: int
    memberships: dict[int, set] = field(default_factory=dict)
    truncated: bool = False
    runs: dict = field(default_factory=dict, repr=False)

    def public(self) -> set[int]:
        return {k for k, v in self.memberships.items() if PUBLIC in v}

    def secret(self, delta) -> set[int]:
        limit = self._limit(delta)
        return {k for k, v in self.memberships.items() if any(l is not None and l <= limit for l in v)}

    def expired(self, delta) -> set[int]:
        limit = self._limit(delta)
        return {k for k, v in self.memberships.items() if any(l is not None and l > limit for l in v)}

    def _limit(self, delta):
        delta = as_bound(delta)
        if delta is INF:
            return math.inf
        lim = delta * self.g
        if lim.denominator != 1:
            raise ValueError("delta must lie on the sampling grid")
        if lim > self.lag_cap:
            raise ValueError("delta exceeds the lag cap used during exploration")
        return int(lim)

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "horizon": self.horizon,
            "truncated": self.truncated,
            "arrivals": [
                {
                    "time": str(Fraction(k, self.g)),
                    "public": PUBLIC in v,
                    "lags": [str(Fraction(l, self.g)) for l in sorted(x for x in v if x is not None)],
                }
                for k, v in sorted(self.memberships.items())
            ],
        }


def default_granularity(sys: TimedSystem) -> int:
    return 2 * (len(sys.clocks) + 2) * sys.denom


def oracle_explore(sys: TimedSystem, g: int, H, step_cap: int | None = None, lag_cap: int | None = None,
                   keep_runs: bool = False) -> SampledDurations:
    """Explore every grid run of ``sys`` up to total time ``H``.

    With ``keep_runs`` a witness run is kept for each recorded
    ``(time, lag)`` pair as a list of ``("delay", units)`` and
    ``("edge", index)`` steps.
    """
    if sys.is_parametric:
        raise ModelError("the oracle needs a parameter-free system")
    if g <= 0 or g % (2 * sys.denom):
        raise ValueError(f"granularity must be a positive multiple of {2 * sys.denom}")
    H = Fraction(H)
    end = H * g
    if end.denominator != 1:
        raise ValueError("horizon must lie on the sampling grid")
    end = int(end)
    if step_cap is None:
        step_cap = 10 * g * max(1, math.ceil(H)) * max(1, len(sys.edges))
    if lag_cap is None:
        lag_cap = end
    n = len(sys.clocks)

    # grid-unit constants; clock values are clipped just above their largest constant
    top = [0] * n
    for a in sys.atoms():
        top[a.clock] = max(top[a.clock], int(a.value * g))
    clip = [t + 1 for t in top]

    def compile_guard(gd):
        return [(a.clock, a.op, int(a.value * g)) for a in gd.atoms]

    def sat(atoms, vals):
        for i, op, c in atoms:
            x = vals[i]
            if op == "<":
                ok = x < c
            elif op == "<=":
                ok = x <= c
            elif op == "==":
                ok = x == c
            elif op == ">=":
                ok = x >= c
            else:
                ok = x > c
            if not ok:
                return False
        return True

    invs = [compile_guard(gd) for gd in sys.invariants]
    out = [[] for _ in sys.locations]
    for idx, e in enumerate(sys.edges):
        if e.source != sys.final:
            out[e.source].append((compile_guard(e.guard), tuple(e.resets), e.target, idx))

    result = SampledDurations(g, end // g if end % g == 0 else H, lag_cap)
    visited_flag = sys.init == sys.private
    start = (sys.init, (0,) * n, visited_flag, 0 if visited_flag else -1)
    if not sat(invs[sys.init], start[1]):
        return result
    layer = {start: 0}
    parents: dict = {}
    if keep_runs:
        parents[(0, start)] = None

    def record(t, lag, src_key, edge_idx):
        bucket = result.memberships.setdefault(t, set())
        tag = PUBLIC if lag < 0 else lag
        if keep_runs and tag not in bucket:
            result.runs[(t, tag)] = _unwind(parents, (t, src_key)) + [("edge", edge_idx)]
        bucket.add(tag)

    for t in range(end + 1):
        # discrete closure inside the instant t
        frontier = list(layer)
        while frontier:
            nxt = []
            for key in frontier:
                depth = layer[key]
                loc, vals, seen, lag = key
                for guard, resets, target, idx in out[loc]:
                    if not sat(guard, vals):
                        continue
                    if resets:
                        nv = list(vals)
                        for r in resets:
                            nv[r] = 0
                        nv = tuple(nv)
                    else:
                        nv = vals
                    if not sat(invs[target], nv):
                        continue
                    nseen, nlag = seen, lag
                    if target == sys.private:
                        nseen, nlag = True, 0
                    if target == sys.final:
                        record(t, nlag, key, idx)
                        continue
                    if depth + 1 > step_cap:
                        result.truncated = True
                        continue
                    nk = (target, nv, nseen, nlag)
                    if nk not in layer:
                        layer[nk] = depth + 1
                        if keep_runs:
                            parents[(t, nk)] = ((t, key), ("edge", idx))
                        nxt.append(nk)
            frontier = nxt
        if t == end:
            break
        # one grid step of delay
        delayed = {}
        for key, depth in layer.items():
            loc, vals, seen, lag = key
            nv = tuple(min(v + 1, c) for v, c in zip(vals, clip))
            if not sat(invs[loc], nv):
                continue
            if depth + 1 > step_cap:
                result.truncated = True
                continue
            nlag = min(lag + 1, lag_cap + 1) if seen else lag
            nk = (loc, nv, seen, nlag)
            if nk not in delayed or delayed[nk] > depth + 1:
                delayed[nk] = depth + 1
                if keep_runs:
                    parents[(t + 1, nk)] = ((t, key), ("delay", 1))
        layer = delayed
    return result


def _unwind(parents, node) -> list:
    steps = []
    while parents.get(node) is not None:
        node, step = parents[node]
        steps.append(step)
    steps.reverse()
    merged = []
    for kind, v in steps:
        if kind == "delay" and merged and merged[-1][0] == "delay":
            merged[-1] = ("delay", merged[-1][1] + v)
        else:
            merged.append((kind, v))
    return merged


def replay(sys: TimedSystem, run, g: int) -> tuple[Fraction, Fraction | None]:
    """Check a grid run against the concrete semantics; return (duration, lag).

    ``lag`` is ``None`` when the run never visits the private location.
    Raises ``AssertionError`` if some step is not allowed.
    """
    vals = [Fraction(0)] * len(sys.clocks)
    loc = sys.init
    now = Fraction(0)
    entered = now if loc == sys.private else None
    assert sys.invariants[loc].holds(vals), "initial invariant violated"
    for kind, v in run:
        assert loc != sys.final, "run continues past the final location"
        if kind == "delay":
            d = Fraction(v, g)
            vals = [x + d for x in vals]
            now += d
            assert sys.invariants[loc].holds(vals), f"invariant of {sys.locations[loc]} violated"
        else:
            e = sys.edges[v]
            assert e.source == loc, "edge does not leave the current location"
            assert e.guard.holds(vals), f"guard of edge #{v} violated"
            vals = [Fraction(0) if i in e.resets else x for i, x in enumerate(vals)]
            loc = e.target
            assert sys.invariants[loc].holds(vals), f"invariant of {sys.locations[loc]} violated"
            if loc == sys.private:
                entered = now
    assert loc == sys.final, "run does not end in the final location"
    return now, (None if entered is None else now - entered)


def oracle_mismatches(sys: TimedSystem, delta, g: int | None = None, H=10, sets=None,
                      step_cap: int | None = None, sampled: SampledDurations | None = None):
    """Probe points ``k`` and midpoints ``k + 1/2`` for ``k < H``.

    Returns ``(mismatches, truncated)`` where each mismatch is
    ``(class, time, pipeline_says, oracle_says)``.  ``sets`` defaults to the
    region pipeline's :func:`etop.opacity.class_sets`.
    """
    from .opacity import class_sets

    delta = as_bound(delta)
    if g is None:
        g = default_granularity(sys)
    if delta is not INF and (delta * g).denominator != 1:
        raise ValueError("granularity must be a multiple of the denominator of delta")
    if sets is None:
        sets = class_sets(sys, delta)
    if sampled is None:
        lag_cap = None if delta is INF else int(delta * g)
        sampled = oracle_explore(sys, g, H, step_cap=step_cap, lag_cap=lag_cap)
    oracle = {
        "secret": sampled.secret(delta),
        "expired": sampled.expired(delta) if delta is not INF else set(),
        "public": sampled.public(),
    }
    pipeline = {"secret": sets.secret, "expired": sets.expired, "public": sets.public}
    bad = []
    for k in range(int(H)):
        for units in (k * g, k * g + g // 2):
            t = Fraction(units, g)
            for cls in ("secret", "expired", "public"):
                says = t in pipeline[cls]
                saw = units in oracle[cls]
                if says != saw:
                    bad.append((cls, t, says, saw))
    return bad, sampled.truncated


def oracle_agrees(sys: TimedSystem, delta, g: int | None = None, H=10, sets=None,
                  step_cap: int | None = None) -> bool | None:
    """True/False for agreement with the region pipeline; None if truncated."""
    bad, truncated = oracle_mismatches(sys, delta, g, H, sets, step_cap)
    if truncated:
        return None
    return not bad
