"""Exact synthesis of Clifford+T and classical reversible circuits by SAT solving."""

from .encode import PROVEN, TIGHT, InfeasibleError, SynthesisProblem, bit_width, encode_instance
from .gates import GateSet, build_gate_set, builtin_gate
from .reversible import TruthTableSpec, encode_reversible, parse_truth_table, synth_reversible_min
from .ring import NotInRing, RingElem, ScaledMatrix, ScaledRing, norm_sq, phase_factor
from .search import SearchResult, find_min_circuit, minimize_type_count
from .solve import Circuit, SolverConfig, find_solver, run_solver
from .targets import MatrixTarget, StateMapping, builtin_target, read_target, write_target
from .verify import check_implements, simulate_exact

__version__ = "0.1.0"

__all__ = [
    "PROVEN", "TIGHT", "InfeasibleError", "SynthesisProblem", "bit_width", "encode_instance",
    "GateSet", "build_gate_set", "builtin_gate",
    "TruthTableSpec", "encode_reversible", "parse_truth_table", "synth_reversible_min",
    "NotInRing", "RingElem", "ScaledMatrix", "ScaledRing", "norm_sq", "phase_factor",
    "SearchResult", "find_min_circuit", "minimize_type_count",
    "Circuit", "SolverConfig", "find_solver", "run_solver",
    "MatrixTarget", "StateMapping", "builtin_target", "read_target", "write_target",
    "check_implements", "simulate_exact",
]
