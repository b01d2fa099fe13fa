"""Labelled transition systems, CCS, bisimulation and the modal mu-calculus."""
from ._kernels import BACKEND
from .bisim import (is_bisimulation, is_weak_bisimulation, strong_bisim, tau_closure,
                    trace_equal, traces_upto, weak_bisim, weak_saturate)
from .ccs import Defs, canonical, ccs_to_lts, parse_proc, parse_program
from .core import TAU, Lts, Partition, StateLimitExceeded
from .mu import char_formula, mc_check, mc_naive, parse_formula

__all__ = [
    "BACKEND", "TAU", "Lts", "Partition", "StateLimitExceeded", "Defs", "canonical",
    "ccs_to_lts", "parse_proc", "parse_program", "strong_bisim", "weak_saturate",
    "weak_bisim", "tau_closure", "traces_upto", "trace_equal", "is_bisimulation",
    "is_weak_bisimulation", "mc_check", "mc_naive", "char_formula", "parse_formula",
]
