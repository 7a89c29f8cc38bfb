"""Clocks, parameters, guards and (parametric) timed automata.

Everything here is immutable.  Identifiers (clocks, parameters, locations)
are dense integer indices into the name tuples of a :class:`TimedSystem`.
Constants are exact :class:`~fractions.Fraction` values; the system-wide
denominator is exposed as :attr:`TimedSystem.denom`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

OPS = ("<", "<=", "==", ">=", ">")


class ModelError(ValueError):
    """Raised when a model operation receives an unusable system."""


@dataclass(frozen=True)
class LinExpr:
    """``sum(coeff * param) + constant`` with integer coefficients."""

    coeffs: tuple[tuple[int, int], ...] = ()
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        merged: dict[int, int] = {}
        for p, a in self.coeffs:
            merged[p] = merged.get(p, 0) + int(a)
        object.__setattr__(self, "coeffs", tuple(sorted((p, a) for p, a in merged.items() if a)))
        object.__setattr__(self, "constant", Fraction(self.constant))

    @classmethod
    def const(cls, value) -> "LinExpr":
        return cls((), Fraction(value))

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def params(self) -> set[int]:
        return {p for p, _ in self.coeffs}

    def evaluate(self, valuation: Mapping[int, Fraction]) -> Fraction:
        return self.constant + sum((a * valuation[p] for p, a in self.coeffs), Fraction(0))

    def scaled(self, q) -> "LinExpr":
        # coefficients multiply parameters, which are not rescaled here
        if self.coeffs:
            raise ModelError("cannot scale a parametric expression")
        return LinExpr((), self.constant * q)


@dataclass(frozen=True)
class AtomicConstraint:
    clock: int
    op: str
    rhs: LinExpr

    def __post_init__(self):
        if self.op not in OPS:
            raise ModelError(f"unknown comparator {self.op!r}")

    @property
    def value(self) -> Fraction:
        """Right-hand side of a non-parametric atom."""
        if not self.rhs.is_constant:
            raise ModelError("atom still mentions parameters")
        return self.rhs.constant

    def holds(self, x) -> bool:
        c = self.value
        return {
            "<": x < c,
            "<=": x <= c,
            "==": x == c,
            ">=": x >= c,
            ">": x > c,
        }[self.op]


def atom(clock: int, op: str, value) -> AtomicConstraint:
    """Shorthand for a parameter-free atom ``clock op value``."""
    return AtomicConstraint(clock, op, LinExpr.const(value))


@dataclass(frozen=True)
class Guard:
    """Conjunction of atoms; the empty conjunction is ``true``."""

    atoms: tuple[AtomicConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def __and__(self, other: "Guard") -> "Guard":
        return Guard(self.atoms + other.atoms)

    def __bool__(self) -> bool:
        return bool(self.atoms)

    def holds(self, clocks: Sequence) -> bool:
        return all(a.holds(clocks[a.clock]) for a in self.atoms)


TRUE = Guard()


@dataclass(frozen=True)
class Edge:
    source: int
    guard: Guard
    action: str
    resets: frozenset[int]
    target: int

    def __post_init__(self):
        object.__setattr__(self, "resets", frozenset(self.resets))


@dataclass(frozen=True)
class TimedSystem:
    """A (parametric) timed automaton with init, private and final locations.

    ``invariants`` is indexed by location.  A system without parameters is a
    timed automaton in the usual sense.
    """

    name: str
    locations: tuple[str, ...]
    clocks: tuple[str, ...]
    init: int
    private: int
    final: int
    edges: tuple[Edge, ...] = ()
    invariants: tuple[Guard, ...] = ()
    params: tuple[str, ...] = ()
    actions: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("locations", "clocks", "edges", "params"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        invs = tuple(self.invariants)
        if len(invs) < len(self.locations):
            invs = invs + (TRUE,) * (len(self.locations) - len(invs))
        object.__setattr__(self, "invariants", invs)
        if not self.actions:
            seen = dict.fromkeys(e.action for e in self.edges)
            object.__setattr__(self, "actions", tuple(seen))
        else:
            object.__setattr__(self, "actions", tuple(self.actions))

    # -- queries -----------------------------------------------------------

    def atoms(self):
        """Every atom of every guard and invariant."""
        for g in self.invariants:
            yield from g.atoms
        for e in self.edges:
            yield from e.guard.atoms

    @property
    def is_parametric(self) -> bool:
        return bool(self.params) or any(not a.rhs.is_constant for a in self.atoms())

    @property
    def denom(self) -> int:
        """Least common denominator of every constant in the system."""
        d = 1
        for a in self.atoms():
            d = math.lcm(d, a.rhs.constant.denominator)
        return d

    def constants(self) -> set[Fraction]:
        return {a.rhs.constant for a in self.atoms()}

    def loc(self, name: str) -> int:
        return self.locations.index(name)

    def clock(self, name: str) -> int:
        return self.clocks.index(name)

    def outgoing(self, loc: int) -> list[Edge]:
        return [e for e in self.edges if e.source == loc]

    def fresh_name(self, base: str, taken: Sequence[str] | None = None) -> str:
        taken = set(self.clocks if taken is None else taken)
        if base not in taken:
            return base
        i = 1
        while f"{base}{i}" in taken:
            i += 1
        return f"{base}{i}"

    def with_(self, **changes) -> "TimedSystem":
        return replace(self, **changes)


@dataclass(frozen=True)
class LUClassification:
    """Per-parameter role: ``lower``, ``upper``, ``unused`` or ``violating``."""

    roles: dict[str, str]

    @property
    def is_lu(self) -> bool:
        return "violating" not in self.roles.values()


# -- operations ---------------------------------------------------------------


def validate(sys: TimedSystem) -> list[str]:
    """Return diagnostics for every broken structural invariant ([] if valid)."""
    diags: list[str] = []
    nl, nc, np_ = len(sys.locations), len(sys.clocks), len(sys.params)
    for kind, names in (("location", sys.locations), ("clock", sys.clocks), ("param", sys.params)):
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            diags.append(f"duplicate {kind} names: {', '.join(dup)}")
    for role in ("init", "private", "final"):
        if not 0 <= getattr(sys, role) < nl:
            diags.append(f"{role} location {getattr(sys, role)} does not exist")
    if sys.init == sys.final:
        diags.append("init equals final")
    if sys.private == sys.final:
        diags.append("private equals final")
    if len(sys.invariants) != nl:
        diags.append("invariant table does not match the location count")

    def check_guard(g: Guard, where: str):
        for a in g.atoms:
            if not 0 <= a.clock < nc:
                diags.append(f"{where}: undeclared clock {a.clock}")
            for p, _ in a.rhs.coeffs:
                if not 0 <= p < np_:
                    diags.append(f"{where}: undeclared parameter {p}")
            if a.rhs.constant.denominator <= 0:
                diags.append(f"{where}: non-canonical constant")

    for i, g in enumerate(sys.invariants):
        check_guard(g, f"invariant of location {_name(sys.locations, i)}")
    for i, e in enumerate(sys.edges):
        label = f"edge #{i} {_name(sys.locations, e.source)}->{_name(sys.locations, e.target)}"
        if not 0 <= e.source < nl or not 0 <= e.target < nl:
            diags.append(f"{label}: source or target does not exist")
        bad = sorted(r for r in e.resets if not 0 <= r < nc)
        if bad:
            diags.append(f"{label}: resets undeclared clock(s) {bad}")
        check_guard(e.guard, label)
    return diags


def _name(names, i):
    return names[i] if 0 <= i < len(names) else f"?{i}"


def _map_atoms(sys: TimedSystem, fn) -> TimedSystem:
    invs = tuple(Guard(tuple(fn(a) for a in g.atoms)) for g in sys.invariants)
    edges = tuple(replace(e, guard=Guard(tuple(fn(a) for a in e.guard.atoms))) for e in sys.edges)
    return replace(sys, invariants=invs, edges=edges)


def instantiate(sys: TimedSystem, valuation: Mapping[str, object]) -> TimedSystem:
    """Substitute every parameter by its value; the result has no parameters.

    ``valuation`` maps parameter *names* to non-negative rationals (anything
    :class:`Fraction` accepts, including strings such as ``"5/2"``).
    """
    values: dict[int, Fraction] = {}
    for i, name in enumerate(sys.params):
        if name not in valuation:
            raise ModelError(f"no value given for parameter {name!r}")
        v = Fraction(valuation[name])
        if v < 0:
            raise ModelError(f"parameter {name!r} must be non-negative, got {v}")
        values[i] = v

    def subst(a: AtomicConstraint) -> AtomicConstraint:
        return AtomicConstraint(a.clock, a.op, LinExpr.const(a.rhs.evaluate(values)))

    return replace(_map_atoms(sys, subst), params=())


def scale(sys: TimedSystem, q: int) -> TimedSystem:
    """Multiply every constant by the positive integer ``q``."""
    if q <= 0:
        raise ModelError(f"scale factor must be positive, got {q}")
    if sys.is_parametric:
        raise ModelError("scale requires a parameter-free system")
    if q == 1:
        return sys
    return _map_atoms(sys, lambda a: AtomicConstraint(a.clock, a.op, a.rhs.scaled(q)))


def lu_classify(sys: TimedSystem) -> LUClassification:
    lower: set[int] = set()
    upper: set[int] = set()
    for a in sys.atoms():
        for p, alpha in a.rhs.coeffs:
            if a.op in ("<", "<="):
                (upper if alpha > 0 else lower).add(p)
            elif a.op in (">", ">="):
                (lower if alpha > 0 else upper).add(p)
            else:
                # equality constrains from both sides
                lower.add(p)
                upper.add(p)
    roles = {}
    for i, name in enumerate(sys.params):
        if i in lower and i in upper:
            roles[name] = "violating"
        elif i in lower:
            roles[name] = "lower"
        elif i in upper:
            roles[name] = "upper"
        else:
            roles[name] = "unused"
    return LUClassification(roles)
