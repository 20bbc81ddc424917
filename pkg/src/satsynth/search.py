"""Iterative deepening over the gate count, and gate-type count minimisation.

Progress lines go to the ``satsynth.search`` logger with a stable
``SEARCH`` prefix::

    SEARCH d=3 vars=1234 clauses=5678 encode=0.01s solve=0.12s verdict=UNSAT
"""

from __future__ import annotations

import logging
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .encode import PROVEN, InfeasibleError, SynthesisProblem, WidthPolicy, encode_instance
from .gates import GateSet
from .ring import RingElem, ScaledRing, phase_factor
from .solve import (
    Circuit,
    Infeasible,
    Sat,
    SolverConfig,
    SolverError,
    SynthesisOutcome,
    Timeout,
    Unsat,
    decode_circuit,
    run_solver,
)
from .targets import MatrixTarget, TargetSpec
from .verify import check_implements

logger = logging.getLogger(__name__)


class SoundnessError(RuntimeError):
    """A solver model decoded to a circuit that fails exact verification."""


@dataclass(frozen=True)
class DepthRecord:
    d: int
    verdict: str  # SAT | UNSAT | INFEASIBLE | TIMEOUT | ERROR
    variables: int = 0
    clauses: int = 0
    encode_time: float = 0.0
    solve_time: float = 0.0
    bound: int | None = None
    detail: str = ""


@dataclass
class SearchResult:
    """Outcome of iterative deepening.

    ``status`` is ``"found"``, ``"unsat"`` (nothing up to ``d_max``),
    ``"infeasible"`` (every depth failed the ring precheck) or ``"error"``.
    ``optimal`` is set only when every smaller depth from 1 was proven empty.
    """

    status: str
    circuit: Circuit | None = None
    minimal_d: int | None = None
    phase: int | None = None
    optimal: bool = False
    records: list[DepthRecord] = field(default_factory=list)
    detail: str = ""

    @property
    def unsat_below(self) -> list[int]:
        stop = self.minimal_d if self.minimal_d is not None else float("inf")
        return [r.d for r in self.records if r.d < stop and r.verdict in ("UNSAT", "INFEASIBLE")]


def _log(rec: DepthRecord) -> None:
    extra = f" k<={rec.bound}" if rec.bound is not None else ""
    logger.info(
        "SEARCH d=%d%s vars=%d clauses=%d encode=%.2fs solve=%.2fs verdict=%s%s",
        rec.d, extra, rec.variables, rec.clauses, rec.encode_time, rec.solve_time, rec.verdict,
        f" ({rec.detail})" if rec.detail else "",
    )


def solve_depth(
    problem: SynthesisProblem,
    solver: SolverConfig,
    artifacts: Path,
    tag: str = "",
    cancel: threading.Event | None = None,
) -> tuple[SynthesisOutcome, DepthRecord]:
    """Encode, solve, decode and verify a single fixed-depth instance."""
    d = problem.depth
    bound = problem.type_bounds[0][1] if problem.type_bounds else None
    t0 = time.monotonic()
    try:
        f, vm = encode_instance(problem)
    except InfeasibleError as exc:
        rec = DepthRecord(d, "INFEASIBLE", encode_time=time.monotonic() - t0, bound=bound, detail=str(exc))
        _log(rec)
        return Infeasible(str(exc)), rec
    enc_t = time.monotonic() - t0
    stem = f"instance_d{d}{tag}"
    cnf_path = artifacts / f"{stem}.cnf"
    f.write_dimacs(cnf_path)
    raw = run_solver(solver, cnf_path, cancel=cancel, log_path=artifacts / f"{stem}.out")
    base = dict(variables=f.num_vars, clauses=f.num_clauses, encode_time=enc_t, solve_time=raw.wall_time, bound=bound)

    if raw.status == "unsat":
        outcome, rec = Unsat(), DepthRecord(d, "UNSAT", **base)
    elif raw.status == "timeout":
        outcome, rec = Timeout(solver.timeout or 0.0), DepthRecord(d, "TIMEOUT", detail=raw.detail, **base)
    elif raw.status == "error":
        outcome, rec = SolverError(raw.detail), DepthRecord(d, "ERROR", detail=raw.detail, **base)
    else:
        circuit, phase = decode_circuit(raw.model, vm.selectors, problem.gate_set.n, vm.phase_selectors)
        if phase is None:
            phase = vm.fixed_phase
        report = check_implements(circuit, problem.gate_set, problem.target, [phase])
        if not report.passed:
            raise SoundnessError(f"d={d}: decoded circuit {circuit.steps} fails verification: {report}")
        for indices, k in problem.type_bounds:
            used = sum(1 for j in circuit.steps if j in set(indices))
            if used > k:
                raise SoundnessError(f"d={d}: circuit uses {used} gates of a type bounded by {k}")
        outcome, rec = Sat(circuit, phase), DepthRecord(d, "SAT", **base)
    _log(rec)
    return outcome, rec


def _identity_phase(target: TargetSpec, phases: Sequence[int]) -> int | None:
    """Phase multiple for which the empty circuit implements the target, if any."""
    one, zero = ScaledRing(RingElem(1)), ScaledRing(RingElem())
    for k in phases:
        ph = phase_factor(k)
        if isinstance(target, MatrixTarget):
            m = target.matrix
            ok = all(
                ph * m.scaled_entry(r, c) == (one if r == c else zero)
                for c in target.columns()
                for r in range(m.rows)
            )
        else:
            ok = all(ph * o == i for inp, out in target.pairs for i, o in zip(inp, out))
        if ok:
            return k
    return None


class _Workdir:
    def __init__(self, artifacts: str | Path | None):
        self._tmp = None
        if artifacts is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="satsynth-")
            self.path = Path(self._tmp.name)
        else:
            self.path = Path(artifacts)
            self.path.mkdir(parents=True, exist_ok=True)

    def __enter__(self) -> Path:
        return self.path

    def __exit__(self, *exc):
        if self._tmp is not None:
            self._tmp.cleanup()


def find_min_circuit(
    target: TargetSpec,
    gate_set: GateSet,
    d_max: int,
    solver: SolverConfig,
    *,
    d_min: int = 1,
    phase_multiples: Sequence[int] = (0,),
    type_bounds: Sequence[tuple[Sequence[int], int]] = (),
    width_policy: WidthPolicy = PROVEN,
    artifacts: str | Path | None = None,
    workers: int = 1,
    tag: str = "",
) -> SearchResult:
    """Solve d = d_min, d_min + 1, ... and stop at the first verified SAT."""
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    phases = tuple(phase_multiples)
    if d_min <= 1:
        k0 = _identity_phase(target, phases)
        if k0 is not None:
            return SearchResult("found", Circuit(gate_set.n, ()), 0, k0, True)
    d_min = max(1, d_min)
    depths = list(range(d_min, d_max + 1))

    def problem(d: int) -> SynthesisProblem:
        return SynthesisProblem(target, gate_set, d, phases, tuple((tuple(ix), k) for ix, k in type_bounds), width_policy)

    result = SearchResult("unsat")
    voided = d_min > 1
    with _Workdir(artifacts) as work:
        if workers <= 1:
            results = ((d, solve_depth(problem(d), solver, work, tag)) for d in depths)
            return _collect(results, result, voided)
        return _collect(_parallel(depths, problem, solver, work, tag, workers), result, voided)


def _collect(results, result: SearchResult, voided: bool) -> SearchResult:
    all_infeasible = True
    for d, (outcome, rec) in results:
        result.records.append(rec)
        if isinstance(outcome, Sat):
            result.status = "found"
            result.circuit = outcome.circuit
            result.minimal_d = d
            result.phase = outcome.phase
            result.optimal = not voided
            return result
        if isinstance(outcome, Infeasible):
            continue
        all_infeasible = False
        if isinstance(outcome, Timeout):
            voided = True
        elif isinstance(outcome, SolverError):
            result.status = "error"
            result.detail = f"d={d}: {outcome.detail}"
            return result
    if all_infeasible and result.records:
        result.status = "infeasible"
        result.detail = result.records[-1].detail
    elif voided and any(r.verdict == "TIMEOUT" for r in result.records):
        result.status = "error"
        result.detail = "timeout before any solution"
    return result


def _parallel(depths, problem, solver, work, tag, workers):
    """Yield (d, result) in ascending d while solving up to ``workers`` at once."""
    cancels = {d: threading.Event() for d in depths}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {}
        nxt = 0

        def fill():
            nonlocal nxt
            while nxt < len(depths) and len(futures) < workers:
                d = depths[nxt]
                futures[d] = pool.submit(solve_depth, problem(d), solver, work, tag, cancels[d])
                nxt += 1

        fill()
        try:
            for d in depths:
                if d not in futures:
                    fill()
                out = futures.pop(d).result()
                if isinstance(out[0], Sat):
                    for e in cancels.values():
                        e.set()
                yield d, out
                fill()
        finally:
            for e in cancels.values():
                e.set()
            for fut in futures.values():
                fut.cancel()


# --------------------------------------------------------------- type counts


@dataclass
class TypeCountResult:
    status: str  # "found" | "unsat" | "infeasible" | "error"
    min_count: int | None = None
    circuit: Circuit | None = None
    d: int | None = None
    phase: int | None = None
    proven: bool = False
    records: list[DepthRecord] = field(default_factory=list)
    detail: str = ""


def minimize_type_count(
    target: TargetSpec,
    gate_set: GateSet,
    type_indices: Sequence[int],
    solver: SolverConfig,
    *,
    d_max: int | None = None,
    depth: int | None = None,
    phase_multiples: Sequence[int] = (0,),
    width_policy: WidthPolicy = PROVEN,
    artifacts: str | Path | None = None,
) -> TypeCountResult:
    """Smallest number of gates from ``type_indices`` over circuits of the allowed lengths.

    With ``depth`` only that length is considered; otherwise every length
    ``1..d_max``.  Bounds are tightened downward from the first witness.
    """
    idx = tuple(sorted(set(type_indices)))
    if not idx:
        raise ValueError("type subset must be non-empty")
    if (depth is None) == (d_max is None):
        raise ValueError("give exactly one of depth or d_max")
    lo, hi = (depth, depth) if depth is not None else (1, d_max)
    kw = dict(phase_multiples=phase_multiples, width_policy=width_policy)
    out = TypeCountResult("unsat")

    with _Workdir(artifacts) as work:
        first = find_min_circuit(target, gate_set, hi, solver, d_min=lo, artifacts=work, **kw)
        out.records.extend(first.records)
        if first.status != "found":
            out.status = first.status
            out.detail = first.detail
            return out
        out.status = "found"

        def take(res):
            out.circuit, out.d, out.phase = res.circuit, res.minimal_d, res.phase
            out.min_count = sum(1 for j in res.circuit.steps if j in idx)

        take(first)
        proven = True
        while out.min_count > 0:
            k = out.min_count - 1
            res = find_min_circuit(
                target, gate_set, hi, solver, d_min=lo, type_bounds=[(idx, k)], artifacts=work, tag=f"_k{k}", **kw
            )
            out.records.extend(res.records)
            if res.status == "found":
                take(res)
                continue
            if res.status == "error" or any(r.verdict == "TIMEOUT" for r in res.records):
                proven = False
                out.detail = res.detail
            break
        out.proven = proven
    return out
