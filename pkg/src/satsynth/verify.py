"""Solver-independent verification by exact ring arithmetic.

Nothing here touches the CNF layer: circuits are re-multiplied from the
doubled gate matrices and compared entry by entry with the scaled target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .gates import GateSet
from .ring import NotInRing, RingElem, ScaledMatrix, phase_factor, rescale_to, scaled_mat_mul
from .solve import Circuit
from .targets import MatrixTarget, StateMapping, TargetSpec


@dataclass(frozen=True)
class Mismatch:
    row: int
    col: int
    expected: RingElem
    got: RingElem


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    phase: int | None = None
    mismatch: Mismatch | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _steps(circuit: Circuit | Sequence[int]) -> tuple[int, ...]:
    return tuple(circuit.steps) if isinstance(circuit, Circuit) else tuple(circuit)


def simulate_exact(circuit: Circuit | Sequence[int], gate_set: GateSet) -> ScaledMatrix:
    """Product of doubled gate matrices, step 0 applied first; scale = d."""
    acc = ScaledMatrix.identity(1 << gate_set.n)
    for j in _steps(circuit):
        acc = scaled_mat_mul(gate_set[j].expanded, acc)
    return acc


def apply_exact(circuit: Circuit | Sequence[int], gate_set: GateSet, vec: ScaledMatrix) -> ScaledMatrix:
    """Apply the doubled gates to column(s) ``vec``; scale grows by d."""
    acc = vec
    for j in _steps(circuit):
        acc = scaled_mat_mul(gate_set[j].expanded, acc)
    return acc


def _first_mismatch(got: np.ndarray, expected: np.ndarray, cols: Sequence[int]) -> Mismatch | None:
    diff = np.argwhere((got != expected).any(axis=2))
    if diff.size == 0:
        return None
    r, c = (int(x) for x in diff[0])
    return Mismatch(r, cols[c], RingElem.of(expected[r, c]), RingElem.of(got[r, c]))


def check_implements(
    circuit: Circuit | Sequence[int],
    gate_set: GateSet,
    target: TargetSpec,
    phase_multiples: Iterable[int] = (0,),
) -> VerificationReport:
    """Pass iff some requested phase multiple makes the circuit equal the target."""
    steps = _steps(circuit)
    d = len(steps)
    phases = sorted(set(phase_multiples))
    first: VerificationReport | None = None

    if isinstance(target, MatrixTarget):
        cols = list(target.columns())
        got = simulate_exact(steps, gate_set).data[:, cols]
        for k in phases:
            ph = phase_factor(k)
            try:
                expected = np.array(
                    [
                        [tuple(rescale_to(ph * target.matrix.scaled_entry(r, c), d)) for c in cols]
                        for r in range(target.matrix.rows)
                    ],
                    dtype=np.int64,
                )
            except NotInRing as exc:
                if first is None:
                    first = VerificationReport(False, k, detail=str(exc))
                continue
            mm = _first_mismatch(got, expected, cols)
            if mm is None:
                return VerificationReport(True, k)
            if first is None:
                first = VerificationReport(False, k, mm)
        return first if first is not None else VerificationReport(False, detail="no phase multiples requested")

    assert isinstance(target, StateMapping)
    for k in phases:
        ph = phase_factor(k)
        bad = None
        for s, (inp, out) in enumerate(target.pairs):
            s_in = max(e.scale for e in inp)
            vec = ScaledMatrix([[tuple(rescale_to(e, s_in))] for e in inp], s_in)
            got = apply_exact(steps, gate_set, vec).data
            try:
                expected = np.array([[tuple(rescale_to(ph * e, d + s_in))] for e in out], dtype=np.int64)
            except NotInRing as exc:
                bad = VerificationReport(False, k, detail=f"pair {s}: {exc}")
                break
            mm = _first_mismatch(got, expected, [s])
            if mm is not None:
                bad = VerificationReport(False, k, mm, detail=f"pair {s}")
                break
        if bad is None:
            return VerificationReport(True, k)
        if first is None:
            first = bad
    return first if first is not None else VerificationReport(False, detail="no phase multiples requested")
