"""Command-line front end.

Exit codes: 0 found or verified, 1 no circuit up to ``--max-d`` (or a
failed ``verify``), 2 rejected by the ring precheck, 3 solver error or
timeout, 64 usage error.  Results go to stdout, progress to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from .encode import PROVEN, TIGHT, EncodingError, InfeasibleError, SynthesisProblem, encode_instance
from .gates import GateError, GateSet, build_gate_set, builtin_gate
from .reversible import (
    TruthTableError,
    TruthTableSpec,
    read_truth_table,
    synth_reversible_min,
    truth_table_from_permutation,
)
from .ring import NotInRing, ScaledMatrix
from .search import SearchResult, SoundnessError, find_min_circuit
from .solve import Circuit, SolverConfig, SolverConfigError
from .targets import MatrixTarget, StateMapping, TargetError, builtin_target, read_target
from .verify import check_implements

EXIT_FOUND = 0
EXIT_ABSENT = 1
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_USAGE = 64

_STATUS_EXIT = {"found": EXIT_FOUND, "unsat": EXIT_ABSENT, "infeasible": EXIT_INFEASIBLE, "error": EXIT_SOLVER}

DEFAULT_GATES = "H,T,Tdg,CNOT"
DEFAULT_REVERSIBLE_GATES = "X,CNOT,TOFFOLI"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ emission


def emit_circuit(circuit: Circuit, gate_set: GateSet, fmt: str = "text", result: SearchResult | None = None) -> str:
    """``<name> q<i>[,q<j>...]`` lines, or a JSON document ``verify`` can read back."""
    if fmt == "text":
        return "".join(gate_set[j].label + "\n" for j in circuit.steps)
    if fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    doc = {
        "n": gate_set.n,
        "d": len(circuit.steps),
        "indices": list(circuit.steps),
        "gates": [{"name": gate_set[j].name, "operands": list(gate_set[j].operands)} for j in circuit.steps],
        "gate_set": [gate_set[j].label for j in range(len(gate_set))],
    }
    if result is not None:
        doc.update(phase=result.phase, optimal=result.optimal, unsat_below=result.unsat_below)
    return json.dumps(doc, indent=2) + "\n"


def _parse_gate_line(line: str, n: int, where: str):
    parts = line.split()
    if len(parts) != 2:
        raise UsageError(f"{where}: expected '<name> q<i>[,q<j>...]'")
    try:
        ops = [int(q.strip().lstrip("q")) for q in parts[1].split(",")]
        return builtin_gate(parts[0], ops, n)
    except (ValueError, GateError) as exc:
        raise UsageError(f"{where}: {exc}") from None


def read_circuit(path: str | Path, n: int | None = None) -> tuple[Circuit, GateSet]:
    """Load a circuit written by :func:`emit_circuit` (either format)."""
    text = Path(path).read_text()
    gates = []
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        n = int(doc["n"])
        for s, g in enumerate(doc["gates"]):
            gates.append(_parse_gate_line(f"{g['name']} " + ",".join(str(q) for q in g["operands"]), n, f"gates[{s}]"))
    else:
        if n is None:
            raise UsageError("text circuits need the qubit count from a target")
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                gates.append(_parse_gate_line(line, n, f"{path}:{lineno}"))
    distinct: dict[str, int] = {}
    for g in gates:
        distinct.setdefault(g.label, len(distinct))
    by_label = {g.label: g for g in gates}
    if not gates:
        return Circuit(n, ()), GateSet(n, (builtin_gate("X", (0,), n),))
    gs = GateSet(n, tuple(by_label[lbl] for lbl in distinct))
    return Circuit(n, tuple(distinct[g.label] for g in gates)), gs


# ------------------------------------------------------------------- helpers


def _names(s: str) -> list[str]:
    return [x.strip() for x in s.split(",") if x.strip()]


def _connectivity(s: str | None):
    if s is None:
        return None
    pairs = set()
    for item in _names(s):
        try:
            a, b = (int(x) for x in item.split("-"))
        except ValueError:
            raise UsageError(f"bad connectivity pair {item!r}; expected e.g. 0-1") from None
        pairs.add((a, b))
        pairs.add((b, a))
    # a Toffoli placement is allowed when both controls are connected to the target
    triples = {(a, b, t) for a, t in pairs for b, t2 in pairs if t2 == t and a != b}
    return pairs | triples


def _gate_set(n: int, args) -> GateSet:
    try:
        return build_gate_set(n, _names(args.gates), _connectivity(args.connectivity))
    except (GateError, KeyError, ValueError) as exc:
        raise UsageError(f"gate set: {exc}") from None


def _load_target(args):
    if (args.target is None) == (args.builtin is None):
        raise UsageError("give exactly one of --target or --builtin")
    if args.builtin is not None:
        return builtin_target(args.builtin)
    return read_target(args.target)


def _lift_ancillas(target: MatrixTarget, clean: int, dirty: int) -> MatrixTarget:
    """``U ⊗ I`` on appended qubits (dirty first), keeping columns with clean ancillas at 0."""
    extra = clean + dirty
    if extra == 0:
        return target
    m = target.matrix.kron(ScaledMatrix.identity(1 << extra))
    low = [a for a in range(1 << extra) if a & ((1 << clean) - 1) == 0]
    kept = tuple(sorted((c << extra) | a for c in target.columns() for a in low))
    return MatrixTarget(m, None if len(kept) == m.cols else kept)


def _solver(args) -> SolverConfig:
    if args.solver:
        return SolverConfig(args.solver, timeout=args.timeout)
    return SolverConfig.default(timeout=args.timeout)


def _type_bounds(specs: Sequence[str] | None, gs: GateSet):
    out = []
    for s in specs or ():
        names, sep, k = s.rpartition(":")
        if not sep or not names:
            raise UsageError(f"--max-count expects NAMES:k, got {s!r}")
        try:
            bound = int(k)
        except ValueError:
            raise UsageError(f"--max-count bound {k!r} is not an integer") from None
        try:
            idx = gs.indices_of(_names(names))
        except KeyError as exc:
            raise UsageError(f"--max-count: {exc}") from None
        if not idx:
            raise UsageError(f"--max-count: no gate named {names} in the gate set")
        out.append((tuple(idx), bound))
    return out


def _report(result: SearchResult, gs: GateSet, fmt: str, max_d: int) -> int:
    if result.status == "found":
        sys.stdout.write(emit_circuit(result.circuit, gs, fmt, result))
        note = "optimal" if result.optimal else "not proven optimal"
        phase = "" if result.phase is None else f" phase={result.phase}"
        print(f"# d={result.minimal_d}{phase} ({note})", file=sys.stderr)
    elif fmt == "json":
        doc = {"status": result.status, "unsat_below": result.unsat_below, "detail": result.detail}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    if result.status == "unsat":
        print(f"no circuit with d <= {max_d}", file=sys.stderr)
    elif result.status in ("infeasible", "error"):
        print(f"{result.status}: {result.detail}", file=sys.stderr)
    return _STATUS_EXIT[result.status]


def _widths(args):
    return TIGHT if args.tight_widths else PROVEN


def _phases(args):
    return tuple(range(8)) if args.up_to_phase else (0,)


# ---------------------------------------------------------------- commands


def _cmd_synth(args) -> int:
    target = _load_target(args)
    if args.cmd == "synth":
        if not isinstance(target, MatrixTarget):
            raise UsageError("synth needs a matrix target; use synth-states for state mappings")
        target = _lift_ancillas(target, args.clean_ancilla, args.dirty_ancilla)
    else:
        if not isinstance(target, StateMapping):
            raise UsageError("synth-states needs a state-mapping target")
        if args.clean_ancilla or args.dirty_ancilla:
            raise UsageError("ancilla options apply to matrix targets only")
    gs = _gate_set(target.n, args)
    result = find_min_circuit(
        target, gs, args.max_d, _solver(args),
        d_min=args.min_d,
        phase_multiples=_phases(args),
        type_bounds=_type_bounds(args.max_count, gs),
        width_policy=_widths(args),
        artifacts=args.artifacts,
        workers=args.workers,
    )
    return _report(result, gs, args.emit, args.max_d)


def _cmd_reversible(args) -> int:
    if sum(x is not None for x in (args.table, args.target, args.builtin)) != 1:
        raise UsageError("give exactly one of --table, --target or --builtin")
    if args.table is not None:
        spec: TruthTableSpec = read_truth_table(args.table)
    else:
        target = _load_target(args)
        if not isinstance(target, MatrixTarget):
            raise UsageError("reversible synthesis needs a permutation matrix or a truth table")
        spec = truth_table_from_permutation(target)
    gs = _gate_set(spec.n, args)
    result = synth_reversible_min(spec, gs, args.max_d, _solver(args), d_min=args.min_d, artifacts=args.artifacts)
    return _report(result, gs, args.emit, args.max_d)


def _cmd_verify(args) -> int:
    target = _load_target(args)
    if isinstance(target, MatrixTarget):
        target = _lift_ancillas(target, args.clean_ancilla, args.dirty_ancilla)
    circuit, gs = read_circuit(args.circuit, target.n)
    if gs.n != target.n:
        raise UsageError(f"circuit acts on {gs.n} qubits, target on {target.n}")
    report = check_implements(circuit, gs, target, _phases(args))
    if report.passed:
        print(f"PASS d={len(circuit)} phase={report.phase}")
        return EXIT_FOUND
    detail = report.detail
    if report.mismatch is not None:
        mm = report.mismatch
        detail = f"entry ({mm.row},{mm.col}) expected {tuple(mm.expected)} got {tuple(mm.got)} {detail}".strip()
    print(f"FAIL {detail}")
    return EXIT_ABSENT


def _cmd_encode(args) -> int:
    target = _load_target(args)
    if isinstance(target, MatrixTarget):
        target = _lift_ancillas(target, args.clean_ancilla, args.dirty_ancilla)
    gs = _gate_set(target.n, args)
    problem = SynthesisProblem(
        target, gs, args.depth, _phases(args), tuple(_type_bounds(args.max_count, gs)), _widths(args)
    )
    f, vm = encode_instance(problem)
    if args.output in (None, "-"):
        sys.stdout.write(f.to_dimacs())
    else:
        f.write_dimacs(args.output)
    print(f"# vars={f.num_vars} clauses={f.num_clauses}", file=sys.stderr)
    return EXIT_FOUND


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="satsynth", description="Exact Clifford+T and reversible circuit synthesis via SAT.")
    p.add_argument("-v", "--verbose", action="store_true", help="log per-depth progress to stderr")
    sub = p.add_subparsers(dest="cmd", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        sp = _add(name, **kw)
        sp.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        return sp

    sub.add_parser = add_parser

    def target_opts(sp):
        sp.add_argument("--target", help="JSON target file")
        sp.add_argument("--builtin", help="toffoli | and | swap | fredkin | ghz:N")

    def ancilla_opts(sp):
        sp.add_argument("--clean-ancilla", type=int, default=0, metavar="N")
        sp.add_argument("--dirty-ancilla", type=int, default=0, metavar="N")

    def gate_opts(sp, default):
        sp.add_argument("--gates", default=default, help=f"comma-separated primitives (default {default})")
        sp.add_argument("--connectivity", help="allowed qubit pairs, e.g. 0-1,1-2")

    def search_opts(sp):
        sp.add_argument("--min-d", type=int, default=1)
        sp.add_argument("--max-d", type=int, default=10)
        sp.add_argument("--solver", help="solver executable (default: kissat on PATH)")
        sp.add_argument("--timeout", type=float, help="per-instance solver timeout in seconds")
        sp.add_argument("--artifacts", help="keep per-depth CNF and solver output here")
        sp.add_argument("--emit", choices=("text", "json"), default="text")

    def encoding_opts(sp):
        sp.add_argument("--up-to-phase", action="store_true", help="accept any global phase e^{ik pi/4}")
        sp.add_argument("--max-count", action="append", metavar="NAMES:k", help="at most k gates among NAMES")
        sp.add_argument("--tight-widths", action="store_true", help="narrower, unproven coefficient widths")

    for name in ("synth", "synth-states"):
        sp = sub.add_parser(name, help="minimal circuit for a matrix target" if name == "synth" else
                            "minimal circuit for a state mapping")
        target_opts(sp)
        ancilla_opts(sp)
        gate_opts(sp, DEFAULT_GATES)
        search_opts(sp)
        encoding_opts(sp)
        sp.add_argument("--workers", type=int, default=1, help="depths solved concurrently")
        sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("synth-reversible", help="minimal NOT/CNOT/Toffoli circuit for a truth table")
    sp.add_argument("--table", help="truth-table file")
    target_opts(sp)
    gate_opts(sp, DEFAULT_REVERSIBLE_GATES)
    search_opts(sp)
    sp.set_defaults(func=_cmd_reversible)

    sp = sub.add_parser("verify", help="check a circuit file against a target")
    sp.add_argument("circuit", help="circuit file (text or JSON from --emit)")
    target_opts(sp)
    ancilla_opts(sp)
    sp.add_argument("--up-to-phase", action="store_true")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("encode", help="write the DIMACS instance for one depth")
    target_opts(sp)
    ancilla_opts(sp)
    gate_opts(sp, DEFAULT_GATES)
    encoding_opts(sp)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("-o", "--output", help="output file (default stdout)")
    sp.set_defaults(func=_cmd_encode)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr
    )
    for opt in ("min_d", "max_d", "depth"):
        v = getattr(args, opt, None)
        if v is not None and v < (0 if opt == "min_d" else 1):
            print(f"satsynth: --{opt.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (InfeasibleError, NotInRing) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverConfigError, SoundnessError) as exc:
        print(f"solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, TargetError, TruthTableError, GateError, EncodingError, OSError, json.JSONDecodeError,
            KeyError) as exc:
        print(f"satsynth: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
