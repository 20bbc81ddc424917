"""SAT synthesis of classical reversible circuits over NOT, CNOT and Toffoli.

No matrices are involved: each specified input row carries one boolean per
wire per step, and the selected gate relates consecutive layers.

Truth-table files hold one row per line, ``<input bits> -> <output bits>``,
with ``-`` marking a don't-care output bit and ``#`` starting a comment.
The leftmost character is wire 0.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .cnf import CnfFormula, exactly_one, lit_and
from .gates import GateSet
from .ring import RingElem, ScaledRing
from .search import DepthRecord, SearchResult, SoundnessError, _log, _Workdir
from .solve import Circuit, SolverConfig, decode_circuit, run_solver

logger = logging.getLogger(__name__)

_KIND = {"X": 0, "CNOT": 1, "TOFFOLI": 2}


class TruthTableError(ValueError):
    pass


@dataclass(frozen=True)
class TruthTableSpec:
    """Rows map an input bit tuple to output bits (None = don't care)."""

    n: int
    rows: Mapping[tuple[int, ...], tuple[int | None, ...]]

    def __post_init__(self):
        rows = {tuple(k): tuple(v) for k, v in dict(self.rows).items()}
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise TruthTableError("truth table has no rows")
        for inp, out in rows.items():
            if len(inp) != self.n or len(out) != self.n:
                raise TruthTableError(f"row {inp}: expected {self.n} bits on each side")
        full = [out for out in rows.values() if None not in out]
        if len(set(full)) != len(full):
            warnings.warn("truth table is not injective on its fully specified rows", stacklevel=2)


def _bits(s: str, n: int | None, allow_dc: bool, where: str) -> tuple[int | None, ...]:
    out = []
    for ch in s:
        if ch in "01":
            out.append(int(ch))
        elif ch == "-" and allow_dc:
            out.append(None)
        else:
            raise TruthTableError(f"{where}: bad bit {ch!r}")
    if n is not None and len(out) != n:
        raise TruthTableError(f"{where}: expected {n} bits, got {len(out)}")
    return tuple(out)


def parse_truth_table(text: str) -> TruthTableSpec:
    rows: dict[tuple[int, ...], tuple[int | None, ...]] = {}
    n = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise TruthTableError(f"line {lineno}: expected '<input> -> <output>'")
        lhs, rhs = (x.strip() for x in line.split("->", 1))
        inp = _bits(lhs.replace(" ", ""), n, False, f"line {lineno}")
        n = len(inp)
        out = _bits(rhs.replace(" ", ""), n, True, f"line {lineno}")
        if inp in rows and rows[inp] != out:
            raise TruthTableError(f"line {lineno}: input {lhs} listed twice with different outputs")
        rows[inp] = out
    if n is None:
        raise TruthTableError("truth table has no rows")
    return TruthTableSpec(n, rows)


def read_truth_table(path: str | Path) -> TruthTableSpec:
    try:
        return parse_truth_table(Path(path).read_text())
    except TruthTableError as exc:
        raise TruthTableError(f"{path}: {exc}") from None


def format_truth_table(spec: TruthTableSpec) -> str:
    def s(bits):
        return "".join("-" if b is None else str(b) for b in bits)

    return "".join(f"{s(i)} -> {s(o)}\n" for i, o in sorted(spec.rows.items()))


def _int_of(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def _bits_of(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> (n - 1 - q)) & 1 for q in range(n))


def _ops(circuit: Sequence[int], gate_set: GateSet) -> np.ndarray:
    n = gate_set.n
    ops = np.zeros((len(circuit), 4), dtype=np.int64)
    for s, j in enumerate(circuit):
        g = gate_set[j]
        if g.name not in _KIND:
            raise TruthTableError(f"gate {g.label} is not a classical reversible gate")
        *ctl, tgt = g.operands
        ctl = [n - 1 - q for q in ctl] + [0, 0]
        ops[s] = (_KIND[g.name], ctl[0], ctl[1], n - 1 - tgt)
    return ops


def simulate(circuit: Circuit | Sequence[int], gate_set: GateSet, inputs: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Run the circuit on bit-string inputs (wire 0 first)."""
    steps = circuit.steps if isinstance(circuit, Circuit) else tuple(circuit)
    states = np.array([_int_of(b) for b in inputs], dtype=np.int64)
    out = kernels.simulate_reversible(_ops(steps, gate_set), states)
    return [_bits_of(int(v), gate_set.n) for v in out]


def truth_table_of(circuit: Sequence[int], gate_set: GateSet, inputs: Sequence[Sequence[int]] | None = None) -> TruthTableSpec:
    n = gate_set.n
    if inputs is None:
        inputs = [_bits_of(v, n) for v in range(1 << n)]
    outs = simulate(circuit, gate_set, inputs)
    return TruthTableSpec(n, {tuple(i): o for i, o in zip(inputs, outs)})


def check_truth_table(circuit: Circuit | Sequence[int], gate_set: GateSet, spec: TruthTableSpec) -> bool:
    inputs = list(spec.rows)
    outs = simulate(circuit, gate_set, inputs)
    return all(
        all(w is None or w == g for w, g in zip(spec.rows[i], got)) for i, got in zip(inputs, outs)
    )


# ------------------------------------------------------------------ encoding


@dataclass
class ReversibleVarMap:
    selectors: list[list[int]]
    wires: dict[tuple[int, int, int], int] = field(default_factory=dict)
    row_inputs: tuple[tuple[int, ...], ...] = ()

    def selector(self, i: int, j: int) -> int:
        return self.selectors[i][j]

    def wire(self, t: int, i: int, q: int) -> int:
        return self.wires[(t, i, q)]


def _xor_eq(f: CnfFormula, x: int, out: int, a: int, b: int) -> None:
    """``x -> (out == a xor b)``."""
    f.add_clause([-x, -out, a, b])
    f.add_clause([-x, -out, -a, -b])
    f.add_clause([-x, out, -a, b])
    f.add_clause([-x, out, a, -b])


def encode_reversible(spec: TruthTableSpec, gate_set: GateSet, d: int) -> tuple[CnfFormula, ReversibleVarMap]:
    if d < 1:
        raise ValueError("d must be >= 1")
    if spec.n != gate_set.n:
        raise TruthTableError(f"truth table has {spec.n} wires, gate set {gate_set.n}")
    for g in gate_set:
        if g.name not in _KIND:
            raise TruthTableError(f"gate {g.label} is not NOT, CNOT or Toffoli")
    f = CnfFormula()
    n, gs = spec.n, gate_set
    vm = ReversibleVarMap([f.new_vars(len(gs)) for _ in range(d)], row_inputs=tuple(spec.rows))
    for row in vm.selectors:
        exactly_one(f, row)

    for t, (inp, out) in enumerate(spec.rows.items()):
        for i in range(d + 1):
            for q in range(n):
                vm.wires[(t, i, q)] = f.new_var()
        for q in range(n):
            b = vm.wires[(t, 0, q)]
            f.add_clause([b if inp[q] else -b])
            if out[q] is not None:
                b = vm.wires[(t, d, q)]
                f.add_clause([b if out[q] else -b])
        for i in range(d):
            cur = [vm.wires[(t, i, q)] for q in range(n)]
            nxt = [vm.wires[(t, i + 1, q)] for q in range(n)]
            ands: dict[tuple[int, int], int] = {}
            for j, g in enumerate(gs):
                x = vm.selectors[i][j]
                *ctl, tgt = g.operands
                for q in range(n):
                    if q != tgt:
                        f.add_clause([-x, -cur[q], nxt[q]])
                        f.add_clause([-x, cur[q], -nxt[q]])
                if g.name == "X":
                    f.add_clause([-x, cur[tgt], nxt[tgt]])
                    f.add_clause([-x, -cur[tgt], -nxt[tgt]])
                elif g.name == "CNOT":
                    _xor_eq(f, x, nxt[tgt], cur[ctl[0]], cur[tgt])
                else:
                    key = tuple(sorted(ctl))
                    if key not in ands:
                        ands[key] = lit_and(f, cur[key[0]], cur[key[1]])
                    _xor_eq(f, x, nxt[tgt], ands[key], cur[tgt])
    return f, vm


def _is_identity(spec: TruthTableSpec) -> bool:
    return all(all(o is None or o == i for i, o in zip(inp, out)) for inp, out in spec.rows.items())


def synth_reversible_min(
    spec: TruthTableSpec,
    gate_set: GateSet,
    d_max: int,
    solver: SolverConfig,
    *,
    d_min: int = 1,
    artifacts: str | Path | None = None,
) -> SearchResult:
    """Iterative deepening with a truth-table verifier on every SAT model."""
    if d_min <= 1 and _is_identity(spec):
        return SearchResult("found", Circuit(gate_set.n, ()), 0, None, True)
    result = SearchResult("unsat")
    with _Workdir(artifacts) as work:
        for d in range(max(1, d_min), d_max + 1):
            t0 = time.monotonic()
            f, vm = encode_reversible(spec, gate_set, d)
            enc_t = time.monotonic() - t0
            path = work / f"instance_d{d}.cnf"
            f.write_dimacs(path)
            raw = run_solver(solver, path, log_path=work / f"instance_d{d}.out")
            base = dict(variables=f.num_vars, clauses=f.num_clauses, encode_time=enc_t, solve_time=raw.wall_time)
            if raw.status == "sat":
                circuit, _ = decode_circuit(raw.model, vm.selectors, gate_set.n)
                if not check_truth_table(circuit, gate_set, spec):
                    raise SoundnessError(f"d={d}: circuit {circuit.steps} violates the truth table")
                rec = DepthRecord(d, "SAT", **base)
                _log(rec)
                result.records.append(rec)
                result.status, result.circuit, result.minimal_d = "found", circuit, d
                result.optimal = d_min <= 1 and all(r.verdict == "UNSAT" for r in result.records[:-1])
                return result
            verdict = {"unsat": "UNSAT", "timeout": "TIMEOUT"}.get(raw.status, "ERROR")
            rec = DepthRecord(d, verdict, detail=raw.detail, **base)
            _log(rec)
            result.records.append(rec)
            if verdict == "ERROR":
                result.status, result.detail = "error", f"d={d}: {raw.detail}"
                return result
    return result


def truth_table_from_permutation(target) -> TruthTableSpec:
    """Truth table of a permutation-matrix target over its kept columns."""
    m = target.matrix
    n = m.rows.bit_length() - 1
    one = ScaledRing(RingElem(1))
    rows = {}
    for c in target.columns():
        hits = [r for r in range(m.rows) if not m.entry(r, c).is_zero()]
        if len(hits) != 1 or m.scaled_entry(hits[0], c) != one:
            raise TruthTableError(f"column {c} is not a classical basis permutation")
        rows[_bits_of(c, n)] = _bits_of(hits[0], n)
    return TruthTableSpec(n, rows)
