"""Dual-abstraction SoC bus simulator.

A system description (masters with small programs, memory-mapped slaves,
a bus kind) runs either on a transaction-level kernel or, after structural
refinement into Avalon or Wishbone fabric, on a cycle-accurate kernel.
Metrics compare the two: observable accuracy and a structural effort ratio.
"""
from .errors import (
    CombinationalLoop,
    CycleLimitExceeded,
    ElaborationError,
    LimitExceeded,
    SocSimError,
    SpecError,
    TransformError,
)
from .fabric import build_avalon, build_rtl, build_wishbone, mux_plan
from .metrics import compare, complexity, speedup, te_ratio
from .program import Program, format_program, parse_program
from .refine import elaborate_tlm_netlist, refine_loop, transform
from .rtl import elaborate, run_rtl, simulate_rtl
from .spec import BusKind, SystemSpec, load_spec, parse_spec, serialize_spec, tier_spec
from .tlm import AddressMap, arbitrate_rr, route, run_tlm

__version__ = "0.1.0"

__all__ = [
    "AddressMap", "BusKind", "CombinationalLoop", "CycleLimitExceeded", "ElaborationError",
    "LimitExceeded", "Program", "SocSimError", "SpecError", "SystemSpec", "TransformError",
    "arbitrate_rr", "build_avalon", "build_rtl", "build_wishbone", "compare", "complexity",
    "elaborate", "elaborate_tlm_netlist", "format_program", "load_spec", "mux_plan",
    "parse_program", "parse_spec", "refine_loop", "route", "run_rtl", "run_tlm",
    "serialize_spec", "simulate_rtl", "speedup", "te_ratio", "tier_spec", "transform",
]
