"""Hole-bounded reachability for (timed) multi-stack pushdown automata."""

from .closure import compute_wr, compute_wrt, transitive_closure
from .holesearch import EmptyUpTo, Reachable, check_reachable, repeated_reachability
from .model import Model, load_model, parse_model, serialize_model, validate_model
from .semantics import Witness, hole_bound_of_run, replay
from .witness import assemble_witness

__version__ = "0.1.0"

__all__ = [
    "EmptyUpTo",
    "Model",
    "Reachable",
    "Witness",
    "assemble_witness",
    "check_reachable",
    "compute_wr",
    "compute_wrt",
    "hole_bound_of_run",
    "load_model",
    "parse_model",
    "replay",
    "repeated_reachability",
    "serialize_model",
    "transitive_closure",
    "validate_model",
]
