"""Command-line front end: ``etop <subcommand> --model FILE ...``.

Exit codes: 0 the property holds, 1 it fails, 2 usage or model error,
3 a resource cap was hit.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .durations import Limits
from .model import ModelError, TimedSystem, instantiate, scale
from .modelfmt import ModelSemanticError, ModelSyntaxError, emit_dot, emit_model, parse_model
from .opacity import class_sets, compute_weak_set, decide, full_emptiness, grid_values, sweep
from .oracle import default_granularity, oracle_explore, oracle_mismatches
from .regions import DEFAULT_STATE_CAP, RegionCapExceeded, region_automaton
from .transforms import INF, absorb_final, add_tick, as_bound, swap_transform, swap_transform_reverse
from .unary import DEFAULT_SUBSET_CAP, SubsetCapExceeded

SCHEMA = "etop/1"
HOLDS, FAILS, USAGE, CAPPED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class OracleTruncated(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: str
    delta: object = None
    mode: str = "weak"
    bindings: dict[str, Fraction] = field(default_factory=dict)
    grids: dict[str, list[Fraction]] = field(default_factory=dict)
    deltas: list = field(default_factory=list)
    limits: Limits = Limits()
    g: int | None = None
    horizon: Fraction = Fraction(10)
    step_cap: int | None = None
    fmt: str = "text"
    dot: str | None = None
    op: str | None = None
    factor: int | None = None
    out: str | None = None


def _q(x) -> str:
    if x is INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a rational number: {text!r}") from None
    return value


def _delta(text: str):
    try:
        return as_bound(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise UsageError(f"invalid delta {text!r}; use e.g. 3, 3/2, 2.5 or inf") from None


def _binding(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"binding must look like name=value, got {text!r}")
    return name.strip(), _rational(value)


def _grid(text: str) -> tuple[str, list[Fraction]]:
    """``name=lo..hi:step``."""
    name, sep, rng = text.partition("=")
    lohi, sep2, step = rng.partition(":")
    lo, sep3, hi = lohi.partition("..")
    if not (sep and sep2 and sep3 and name.strip()):
        raise UsageError(f"grid must look like name=lo..hi:step, got {text!r}")
    try:
        return name.strip(), grid_values(_rational(lo), _rational(hi), _rational(step))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", required=True, help="model file, or - for stdin")
    common.add_argument("--bind", action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--max-regions", type=int, default=DEFAULT_STATE_CAP)
    common.add_argument("--max-subsets", type=int, default=DEFAULT_SUBSET_CAP)

    p = _Parser(prog="etop", description="Expiring execution-time opacity of timed automata.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="decide weak or full opacity for one delta")
    c.add_argument("--delta", required=True)
    c.add_argument("--mode", choices=("weak", "full"), default="weak")

    sub.add_parser("compute-weak", parents=[common], help="all deltas giving weak opacity")

    e = sub.add_parser("emptiness", parents=[common], help="is some delta opaque?")
    e.add_argument("--mode", choices=("weak", "full"), default="weak")

    d = sub.add_parser("durations", parents=[common], help="secret, expired and public duration sets")
    d.add_argument("--delta", required=True)

    t = sub.add_parser("transform", parents=[common], help="print a transformed model")
    t.add_argument("--op", choices=("swap", "swap-rev", "tick", "scale"), required=True)
    t.add_argument("--delta")
    t.add_argument("--factor", type=int)
    t.add_argument("--out", help="write the model here instead of stdout")

    r = sub.add_parser("regions", parents=[common], help="region automaton of the final location")
    r.add_argument("--dot", required=True, metavar="FILE")

    o = sub.add_parser("oracle", parents=[common], help="cross-check duration sets by grid sampling")
    o.add_argument("--delta", required=True)
    o.add_argument("--g", type=int)
    o.add_argument("--horizon", default="10")
    o.add_argument("--step-cap", type=int)

    s = sub.add_parser("sweep", parents=[common], help="decide on a parameter grid")
    s.add_argument("--grid", action="append", default=[], metavar="NAME=LO..HI:STEP")
    s.add_argument("--delta", action="append", default=[], dest="deltas")
    s.add_argument("--mode", choices=("weak", "full"), default="weak")
    return p


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if ns.max_regions <= 0 or ns.max_subsets <= 0:
        raise UsageError("caps must be positive")
    cfg = RunConfig(ns.command, ns.model, fmt=ns.format, limits=Limits(ns.max_regions, ns.max_subsets))
    cfg.bindings = dict(_binding(b) for b in ns.bind)
    if getattr(ns, "delta", None) is not None:
        cfg.delta = _delta(ns.delta)
    cfg.mode = getattr(ns, "mode", "weak")
    if ns.command == "sweep":
        cfg.grids = dict(_grid(g) for g in ns.grid)
        cfg.deltas = [_delta(d) for d in ns.deltas] or [INF]
    if ns.command == "transform":
        cfg.op, cfg.factor, cfg.out = ns.op, ns.factor, ns.out
        if ns.op in ("swap", "swap-rev") and (cfg.delta is None or cfg.delta is INF):
            raise UsageError(f"--op {ns.op} needs a finite --delta")
        if ns.op == "scale" and (cfg.factor is None or cfg.factor <= 0):
            raise UsageError("--op scale needs a positive --factor")
    if ns.command == "regions":
        cfg.dot = ns.dot
    if ns.command == "oracle":
        cfg.g, cfg.step_cap = ns.g, ns.step_cap
        cfg.horizon = _rational(ns.horizon)
    return cfg


def load(cfg: RunConfig, stdin=None) -> TimedSystem:
    if cfg.model == "-":
        text, name = (stdin or sys.stdin).read(), "<stdin>"
    else:
        try:
            text, name = Path(cfg.model).read_text(), cfg.model
        except OSError as exc:
            raise UsageError(f"cannot read model: {exc}") from None
    pta = parse_model(text, name)
    if cfg.command == "sweep":
        return pta
    if pta.params or cfg.bindings:
        unknown = sorted(set(cfg.bindings) - set(pta.params))
        if unknown:
            raise UsageError(f"unknown parameter(s): {', '.join(unknown)}")
        return instantiate(pta, cfg.bindings)
    return pta


def write_atomic(path: str, text: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands -----------------------------------------------------------------
# Each returns (exit code, JSON payload, text rendering).


def _check(cfg, ta):
    v = decide(ta, cfg.delta, cfg.mode, cfg.limits)
    payload = {"opaque": v.opaque, "witness": v.witness.to_json() if v.witness else None, "stats": v.stats.to_json()}
    text = f"{cfg.mode} opacity for delta={_q(cfg.delta)}: {'holds' if v.opaque else 'fails'}"
    if v.witness:
        text += f"\nwitness: duration {v.witness.cell} is {v.witness.side} only"
    return (HOLDS if v.opaque else FAILS), payload, text


def _compute_weak(cfg, ta):
    ds = compute_weak_set(ta, cfg.limits)
    payload = {"delta_set": ds.to_json()}
    return (FAILS if ds.is_empty() else HOLDS), payload, f"weakly opaque for delta in {ds}"


def _emptiness(cfg, ta):
    if cfg.mode == "weak":
        ds = compute_weak_set(ta, cfg.limits)
        nonempty, exactness = not ds.is_empty(), "exact"
    else:
        nonempty, ds, exactness = full_emptiness(ta, cfg.limits)
    payload = {"nonempty": nonempty, "delta_set": ds.to_json() if ds is not None else None, "exactness": exactness}
    text = f"some delta gives {cfg.mode} opacity: {'yes' if nonempty else 'no'}"
    if ds is not None:
        text += f"\ndelta set: {ds}"
    return (HOLDS if nonempty else FAILS), payload, text


def _durations(cfg, ta):
    cs = class_sets(ta, cfg.delta, cfg.limits)
    named = {"secret": cs.secret, "expired": cs.expired, "public": cs.public}
    payload = {"sets": {k: v.to_json() for k, v in named.items()}, "stats": cs.stats.to_json()}
    text = "\n".join(f"{k:8} {v}" for k, v in named.items())
    return HOLDS, payload, text


def _transform(cfg, ta):
    if cfg.op == "swap":
        out = swap_transform(ta, cfg.delta)
    elif cfg.op == "swap-rev":
        out = swap_transform_reverse(ta, cfg.delta)
    elif cfg.op == "scale":
        out = scale(ta, cfg.factor)
    else:
        out = add_tick(scale(ta, ta.denom))
    text = emit_model(out)
    if cfg.out:
        write_atomic(cfg.out, text)
    return HOLDS, {"op": cfg.op, "model": text}, text.rstrip("\n")


def _regions(cfg, ta):
    work = absorb_final(scale(ta, ta.denom))
    work = work.with_(edges=tuple(e for e in work.edges if e.source != work.final))
    work = add_tick(work, skip={work.final})
    ra = region_automaton(work, work.final, cap=cfg.limits.regions)
    write_atomic(cfg.dot, emit_dot(ra))
    n = ra.graph.size
    payload = {"dot": cfg.dot, "regions": n, "time_unit": _q(Fraction(1, ta.denom))}
    return HOLDS, payload, f"wrote {n} regions to {cfg.dot}"


def _oracle(cfg, ta):
    delta = cfg.delta
    g = cfg.g or default_granularity(ta)
    if delta is not INF:
        g = g * (delta * g).denominator
    lag_cap = None if delta is INF else int(delta * g)
    sampled = oracle_explore(ta, g, cfg.horizon, step_cap=cfg.step_cap, lag_cap=lag_cap)
    bad, truncated = oracle_mismatches(ta, delta, g, cfg.horizon, sets=class_sets(ta, delta, cfg.limits), sampled=sampled)
    if truncated:
        raise OracleTruncated(f"oracle hit its step cap with g={g}; raise --step-cap")
    payload = {
        "g": g,
        "horizon": _q(cfg.horizon),
        "agrees": not bad,
        "mismatches": [
            {"class": c, "duration": _q(t), "regions": says, "oracle": saw} for c, t, says, saw in bad
        ],
    }
    text = f"oracle (g={g}, horizon={_q(cfg.horizon)}): {'agrees' if not bad else f'{len(bad)} mismatches'}"
    for c, t, says, saw in bad:
        text += f"\n  {c} {_q(t)}: regions say {says}, oracle says {saw}"
    return (FAILS if bad else HOLDS), payload, text


def _sweep(cfg, pta):
    report = sweep(pta, cfg.grids, cfg.deltas, cfg.mode, cfg.limits)
    rows = []
    lines = []
    for row in report.rows:
        vals = {p: _q(v) for p, v in row.valuation}
        rows.append({"valuation": vals, "delta": _q(row.delta), "opaque": row.opaque, "error": row.error})
        shown = " ".join(f"{p}={v}" for p, v in vals.items())
        lines.append(f"{shown} delta={_q(row.delta)}: " + (row.error or ("opaque" if row.opaque else "not opaque")))
    code = CAPPED if any(r.error for r in report.rows) else HOLDS
    return code, {"rows": rows}, "\n".join(lines)


COMMANDS = {
    "check": _check,
    "compute-weak": _compute_weak,
    "emptiness": _emptiness,
    "durations": _durations,
    "transform": _transform,
    "regions": _regions,
    "oracle": _oracle,
    "sweep": _sweep,
}


def _emit_error(fmt: str, kind: str, message: str, stdout, stderr, span=None, diagnostics=None) -> None:
    where = f"{span}: " if span else ""
    print(f"etop: {kind}: {where}{message}", file=stderr)
    for d in diagnostics or ():
        print(f"  {d}", file=stderr)
    if fmt == "json":
        err = {"kind": kind, "message": message}
        if span is not None:
            err["span"] = {"file": span.file, "line": span.line, "column": span.column, "length": span.length}
        if diagnostics:
            err["diagnostics"] = list(diagnostics)
        print(json.dumps({"schema": SCHEMA, "error": err}, sort_keys=True), file=stdout)


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "json" if "--format=json" in argv or any(
        a == "--format" and b == "json" for a, b in zip(argv, argv[1:])
    ) else "text"
    try:
        cfg = parse_args(argv)
        fmt = cfg.fmt
        ta = load(cfg, stdin)
        code, payload, text = COMMANDS[cfg.command](cfg, ta)
    except UsageError as exc:
        _emit_error(fmt, "usage", str(exc), stdout, stderr)
        return USAGE
    except ModelSyntaxError as exc:
        _emit_error(fmt, "syntax", exc.message, stdout, stderr, span=exc.span)
        return USAGE
    except ModelSemanticError as exc:
        _emit_error(fmt, "model", "invalid model", stdout, stderr, diagnostics=exc.diagnostics)
        return USAGE
    except (ModelError, ValueError, TypeError) as exc:
        _emit_error(fmt, "model", str(exc), stdout, stderr)
        return USAGE
    except (RegionCapExceeded, SubsetCapExceeded, OracleTruncated) as exc:
        _emit_error(fmt, "cap", str(exc), stdout, stderr)
        return CAPPED
    if fmt == "json":
        doc = {"schema": SCHEMA, "problem": cfg.command}
        if cfg.command in ("check", "emptiness", "sweep"):
            doc["mode"] = cfg.mode
        if cfg.delta is not None:
            doc["delta"] = _q(cfg.delta)
        doc.update(payload)
        print(json.dumps(doc, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
