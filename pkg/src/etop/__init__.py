"""Expiring execution-time opacity for timed automata."""
from .durations import DurationSet, Limits, duration_set
from .model import TimedSystem, instantiate, scale
from .modelfmt import emit_model, parse_model
from .opacity import class_sets, compute_weak_set, decide, decide_pta, full_emptiness, sweep, weak_emptiness
from .transforms import INF

__all__ = [
    "DurationSet",
    "INF",
    "Limits",
    "TimedSystem",
    "class_sets",
    "compute_weak_set",
    "decide",
    "decide_pta",
    "duration_set",
    "emit_model",
    "full_emptiness",
    "instantiate",
    "parse_model",
    "scale",
    "sweep",
    "weak_emptiness",
]
