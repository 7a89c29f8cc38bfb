"""The ``.ta`` text format, plus DOT output for region automata.

Grammar::

    system   := "ta" NAME ";" decl*
    decl     := "clock" idlist ";" | "param" idlist ";" | locdecl | edgedecl
    locdecl  := "loc" NAME flag* ("invariant" guard)? ";"     flag: init|private|final
    edgedecl := "edge" NAME "->" NAME ("when" guard)? ("do" "{" idlist? "}")?
                ("sync" NAME)? ";"
    guard    := atom ("&&" atom)*
    atom     := CLOCK ("<"|"<="|"=="|">="|">") linexpr
    linexpr  := "-"? term (("+"|"-") term)*
    term     := RATIONAL | RATIONAL "*" PARAM | PARAM
    RATIONAL := INT | INT "/" INT | DECIMAL

Line comments start with ``//`` or ``#``.  Decimal literals are exact.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .model import AtomicConstraint, Edge, Guard, LinExpr, TimedSystem, validate

if TYPE_CHECKING:
    from .regions import RegionAutomaton


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class ModelSyntaxError(ValueError):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*|\#[^\n]*)
  | (?P<num>\d+\.\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|>=|==|->|&&|[<>;{}*/+\-,])
    """,
    re.VERBOSE,
)

KEYWORDS = {"ta", "clock", "param", "loc", "edge", "when", "do", "sync", "invariant"}
FLAGS = ("init", "private", "final")


@dataclass
class _Tok:
    kind: str
    text: str
    span: SourceSpan


def _tokenize(text: str, filename: str) -> list[_Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelSyntaxError(f"unexpected character {text[pos]!r}", SourceSpan(filename, line, col))
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, chunk, SourceSpan(filename, line, col, len(chunk))))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(_Tok("eof", "", SourceSpan(filename, line, col)))
    return toks


class _Parser:
    def __init__(self, text: str, filename: str):
        self.toks = _tokenize(text, filename)
        self.i = 0
        self.filename = filename

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ModelSyntaxError(msg, tok.span)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "name"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def name(self, what="identifier") -> _Tok:
        tok = self.tok
        if tok.kind != "name" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    def rational(self) -> Fraction:
        tok = self.tok
        if tok.kind != "num":
            raise self.error(f"expected a number, found {tok.text or 'end of input'!r}")
        self.i += 1
        value = Fraction(tok.text)
        if self.tok.text == "/" and self.toks[self.i + 1].kind == "num":
            self.i += 1
            den = self.tok
            self.i += 1
            if "." in den.text or int(den.text) == 0:
                raise self.error("denominator must be a positive integer", den)
            value /= int(den.text)
        return value

    # -- grammar -----------------------------------------------------------

    def system(self) -> TimedSystem:
        self.expect("ta")
        name = self.name("system name").text
        self.expect(";")
        self.clocks: list[str] = []
        self.params: list[str] = []
        self.locs: list[str] = []
        self.loc_tok: dict[str, _Tok] = {}
        self.flags: dict[str, list[_Tok]] = {f: [] for f in FLAGS}
        self.invariants: dict[str, list] = {}
        self.raw_edges = []
        while self.tok.kind != "eof":
            if self.accept("clock"):
                self.declare(self.clocks, "clock")
            elif self.accept("param"):
                self.declare(self.params, "param")
            elif self.accept("loc"):
                self.locdecl()
            elif self.accept("edge"):
                self.edgedecl()
            else:
                raise self.error(f"expected a declaration, found {self.tok.text!r}")
        return self.build(name)

    def declare(self, into: list[str], kind: str):
        while True:
            tok = self.name(f"{kind} name")
            if tok.text in self.clocks or tok.text in self.params:
                raise self.error(f"{tok.text!r} already declared", tok)
            into.append(tok.text)
            if not self.accept(","):
                break
        self.expect(";")

    def locdecl(self):
        tok = self.name("location name")
        if tok.text in self.loc_tok:
            raise self.error(f"location {tok.text!r} declared twice", tok)
        self.locs.append(tok.text)
        self.loc_tok[tok.text] = tok
        while self.tok.kind == "name" and self.tok.text in FLAGS:
            self.flags[self.tok.text].append(tok)
            self.i += 1
        inv = []
        if self.accept("invariant"):
            inv = self.guard()
        self.invariants[tok.text] = inv
        self.expect(";")

    def edgedecl(self):
        src = self.name("source location")
        self.expect("->")
        dst = self.name("target location")
        guard, resets, action = [], [], "a"
        if self.accept("when"):
            guard = self.guard()
        if self.accept("do"):
            self.expect("{")
            if self.tok.text != "}":
                resets.append(self.name("clock"))
                while self.accept(","):
                    resets.append(self.name("clock"))
            self.expect("}")
        if self.accept("sync"):
            action = self.name("action").text
        self.expect(";")
        self.raw_edges.append((src, dst, guard, resets, action))

    def guard(self):
        atoms = [self.atom()]
        while self.accept("&&"):
            atoms.append(self.atom())
        return atoms

    def atom(self):
        clock = self.name("clock")
        op = self.tok
        if op.text not in ("<", "<=", "==", ">=", ">"):
            raise self.error(f"expected a comparator, found {op.text!r}")
        self.i += 1
        return clock, op.text, self.linexpr()

    def linexpr(self):
        terms = []
        sign = -1 if self.accept("-") else 1
        while True:
            terms.append((sign, *self.term()))
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return terms

    def term(self):
        if self.tok.kind == "num":
            value = self.rational()
            if self.accept("*"):
                return value, self.name("parameter")
            return value, None
        return Fraction(1), self.name("parameter")

    # -- resolution --------------------------------------------------------

    def resolve_guard(self, raw) -> Guard:
        atoms = []
        for clock_tok, op, terms in raw:
            if clock_tok.text not in self.clocks:
                raise self.error(f"undeclared clock {clock_tok.text!r}", clock_tok)
            coeffs, const = [], Fraction(0)
            for sign, value, ptok in terms:
                if ptok is None:
                    const += sign * value
                    continue
                if ptok.text not in self.params:
                    raise self.error(f"undeclared parameter {ptok.text!r}", ptok)
                if value.denominator != 1:
                    raise self.error("parameter coefficients must be integers", ptok)
                coeffs.append((self.params.index(ptok.text), sign * int(value)))
            atoms.append(AtomicConstraint(self.clocks.index(clock_tok.text), op, LinExpr(tuple(coeffs), const)))
        return Guard(tuple(atoms))

    def loc_index(self, tok):
        if tok.text not in self.loc_tok:
            raise self.error(f"undeclared location {tok.text!r}", tok)
        return self.locs.index(tok.text)

    def build(self, name) -> TimedSystem:
        roles = {}
        for flag in FLAGS:
            marked = self.flags[flag]
            if not marked:
                raise ModelSyntaxError(f"{flag} location missing", SourceSpan(self.filename, 1, 1))
            if len(marked) > 1:
                raise self.error(f"more than one {flag} location", marked[1])
            roles[flag] = self.locs.index(marked[0].text)
        edges = []
        for src, dst, guard, resets, action in self.raw_edges:
            for r in resets:
                if r.text not in self.clocks:
                    raise self.error(f"undeclared clock {r.text!r}", r)
            edges.append(
                Edge(
                    self.loc_index(src),
                    self.resolve_guard(guard),
                    action,
                    frozenset(self.clocks.index(r.text) for r in resets),
                    self.loc_index(dst),
                )
            )
        return TimedSystem(
            name=name,
            locations=tuple(self.locs),
            clocks=tuple(self.clocks),
            params=tuple(self.params),
            init=roles["init"],
            private=roles["private"],
            final=roles["final"],
            invariants=tuple(self.resolve_guard(self.invariants[l]) for l in self.locs),
            edges=tuple(edges),
        )


class ModelSemanticError(ValueError):
    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


def parse_model(text: str, filename: str = "<string>") -> TimedSystem:
    """Parse a ``.ta`` document into a validated :class:`TimedSystem`."""
    sys = _Parser(text, filename).system()
    diags = validate(sys)
    if diags:
        raise ModelSemanticError(diags)
    return sys


# -- emitters -----------------------------------------------------------------


def _fmt_frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_linexpr(e: LinExpr, params) -> str:
    parts = []
    for p, a in e.coeffs:
        mag = abs(a)
        body = params[p] if mag == 1 else f"{mag}*{params[p]}"
        parts.append(("-" if a < 0 else "+", body))
    if e.constant or not parts:
        parts.append(("-" if e.constant < 0 else "+", _fmt_frac(abs(e.constant))))
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _fmt_guard(g: Guard, sys: TimedSystem) -> str:
    return " && ".join(f"{sys.clocks[a.clock]} {a.op} {_fmt_linexpr(a.rhs, sys.params)}" for a in g.atoms)


def emit_model(sys: TimedSystem) -> str:
    lines = [f"ta {sys.name};"]
    if sys.clocks:
        lines.append(f"clock {', '.join(sys.clocks)};")
    if sys.params:
        lines.append(f"param {', '.join(sys.params)};")
    for i, name in enumerate(sys.locations):
        flags = [f for f in FLAGS if getattr(sys, f) == i]
        line = "loc " + " ".join([name, *flags])
        if sys.invariants[i]:
            line += " invariant " + _fmt_guard(sys.invariants[i], sys)
        lines.append(line + ";")
    for e in sys.edges:
        line = f"edge {sys.locations[e.source]} -> {sys.locations[e.target]}"
        if e.guard:
            line += " when " + _fmt_guard(e.guard, sys)
        if e.resets:
            line += " do { " + ", ".join(sys.clocks[c] for c in sorted(e.resets)) + " }"
        line += f" sync {e.action}"
        lines.append(line + ";")
    return "\n".join(lines) + "\n"


def emit_dot(ra: "RegionAutomaton") -> str:
    """Render a region automaton as a Graphviz digraph.

    Exact-arrival regions are drawn as double circles, fractional-arrival
    regions as double octagons.
    """
    ids = {r: i for i, r in enumerate(ra.states)}
    out = ["digraph regions {", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for r, i in ids.items():
        label = ra.describe(r).replace('"', r"\"")
        if r in ra.accept_exact:
            shape = "doublecircle"
        elif r in ra.accept_frac:
            shape = "doubleoctagon"
        else:
            shape = "box"
        out.append(f'  r{i} [shape={shape}, label="{label}"];')
    if ids:
        out.append(f"  __start -> r{ids[ra.initial]};")
    for src, letter, dst in ra.transitions:
        attr = ' [label="tick"]' if letter == "tick" else ""
        out.append(f"  r{ids[src]} -> r{ids[dst]}{attr};")
    out.append("}")
    return "\n".join(out) + "\n"
