"""Synthesis instance -> CNF.

After ``i + 1`` gates the circuit matrix times two to the ``i + 1`` has
coefficients in Z[sqrt2, i].  Those coefficients are bit-vectors in the
formula.  Each step has one selector per gate; a selected gate forces the
next coefficients to equal the gate row times the current ones.  The final
coefficients must equal the scaled target.

Targets are handled column by column.  A full matrix target contributes
one column problem per kept (unmasked) column, starting from a basis
vector.  A state mapping contributes one column problem per (input,
output) pair, starting from the input vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .cnf import (
    BitVec,
    CnfFormula,
    at_most_k,
    bv_add,
    bv_const,
    bv_fresh,
    bv_model_value,
    bv_neg,
    bv_resize,
    bv_shl1,
    bv_sub,
    conditional_equal,
    exactly_one,
)
from .gates import GateSet, validate_gate_for_bound
from .ring import NotInRing, RingElem, ScaledRing, norm_sq, phase_factor, rescale_to
from .targets import MatrixTarget, StateMapping, TargetSpec

logger = logging.getLogger(__name__)

PROVEN = "proven"
TIGHT = "tight"

WidthPolicy = Union[str, Sequence[int]]


class InfeasibleError(ValueError):
    """The target cannot be realised at this gate count (decided without solving)."""


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class _Column:
    key: int  # original column index, or pair index for state mappings
    start: tuple[RingElem, ...]  # input vector times 2**start_scale
    start_scale: int
    output: tuple[ScaledRing, ...]
    extra_bits: int  # width headroom for inputs larger than basis vectors


def _extra_bits(vec: Sequence[RingElem]) -> int:
    m = max(norm_sq(e) for e in vec)
    e = 0
    while 4**e < m:
        e += 1
    return e


def _columns(target: TargetSpec) -> list[_Column]:
    cols = []
    if isinstance(target, MatrixTarget):
        m = target.matrix
        dim = m.rows
        for c in target.columns():
            start = tuple(RingElem(1) if r == c else RingElem() for r in range(dim))
            cols.append(_Column(c, start, 0, tuple(m.scaled_entry(r, c) for r in range(dim)), 0))
    else:
        for s, (inp, out) in enumerate(target.pairs):
            k = max(e.scale for e in inp)
            start = tuple(rescale_to(e, k) for e in inp)
            if all(e.is_zero() for e in start):
                raise EncodingError(f"pair {s}: zero input vector")
            cols.append(_Column(s, start, k, out, _extra_bits(start)))
    return cols


# -------------------------------------------------------------------- widths


def bit_width(i: int, policy: WidthPolicy = PROVEN) -> int:
    """Signed width for coefficients after ``i + 1`` gates."""
    if i < 0:
        raise ValueError("step index must be >= 0")
    if isinstance(policy, str):
        if policy == PROVEN:
            return (3 * (i + 1) + 1) // 2 + 2
        if policy == TIGHT:
            return i + 1 + 2
        raise ValueError(f"unknown width policy {policy!r}")
    widths = list(policy)
    if i >= len(widths):
        raise EncodingError(f"width override has {len(widths)} entries, step {i} needs one")
    return int(widths[i])


def _fits(v: int, width: int) -> bool:
    return -(1 << (width - 1)) <= v < (1 << (width - 1))


# -------------------------------------------------------------------- problem


@dataclass
class SynthesisProblem:
    target: TargetSpec
    gate_set: GateSet
    depth: int
    phase_multiples: tuple[int, ...] = (0,)
    type_bounds: tuple[tuple[tuple[int, ...], int], ...] = ()
    width_policy: WidthPolicy = PROVEN

    def __post_init__(self):
        if self.depth < 1:
            raise EncodingError("depth must be >= 1")
        self.phase_multiples = tuple(sorted(set(self.phase_multiples)))
        if not self.phase_multiples or any(not 0 <= k < 8 for k in self.phase_multiples):
            raise EncodingError("phase multiples must be a non-empty subset of 0..7")
        if self.target.n != self.gate_set.n:
            raise EncodingError(f"target acts on {self.target.n} qubits, gate set on {self.gate_set.n}")
        self.type_bounds = tuple((tuple(ix), int(k)) for ix, k in self.type_bounds)


def final_constants(target: TargetSpec, d: int, k: int) -> dict[int, tuple[RingElem, ...]]:
    """Ring coefficients the circuit must reach after ``d`` gates at phase ``k``."""
    ph = phase_factor(k)
    out = {}
    for col in _columns(target):
        out[col.key] = tuple(rescale_to(ph * e, d + col.start_scale) for e in col.output)
    return out


def feasible_phases(target: TargetSpec, d: int, phases: Iterable[int]) -> list[int]:
    ok = []
    for k in phases:
        try:
            final_constants(target, d, k)
        except NotInRing:
            continue
        ok.append(k)
    return ok


@dataclass
class VarMap:
    """Where every decision and coefficient lives in the formula."""

    depth: int
    num_gates: int
    selectors: list[list[int]]
    coeffs: dict[tuple[int, int, int], tuple[BitVec, ...]] = field(default_factory=dict)
    phase_selectors: dict[int, int] = field(default_factory=dict)
    fixed_phase: int | None = None
    widths: dict[tuple[int, int], int] = field(default_factory=dict)
    column_keys: tuple[int, ...] = ()

    def selector(self, i: int, j: int) -> int:
        return self.selectors[i][j]

    def coeff(self, i: int, row: int, col: int) -> tuple[BitVec, ...]:
        return self.coeffs[(i, row, col)]

    def phase_selector(self, k: int) -> int:
        return self.phase_selectors[k]

    def coeff_value(self, model: Mapping[int, bool], i: int, row: int, col: int) -> RingElem:
        return RingElem(*(bv_model_value(model, bv) for bv in self.coeff(i, row, col)))


@dataclass(frozen=True)
class EncodingStats:
    variables: int
    clauses: int
    depth: int
    gates: int
    widths: tuple[int, ...]

    def __str__(self) -> str:
        return (
            f"vars={self.variables} clauses={self.clauses} d={self.depth} g={self.gates} "
            f"widths={','.join(map(str, self.widths))}"
        )


# -------------------------------------------------------------------- encoder


def _const_vec(f: CnfFormula, u: RingElem, width: int) -> tuple[BitVec, ...]:
    return tuple(bv_const(f, x, width) for x in u)


class _Encoder:
    def __init__(self, f: CnfFormula, width: int):
        self.f = f
        self.width = width
        self._shift_cache: dict[tuple[BitVec, int], BitVec] = {}

    def scaled(self, bv: BitVec, mult: int) -> BitVec:
        """``mult * bv`` at the working width, ``mult > 0``."""
        key = (bv, mult)
        hit = self._shift_cache.get(key)
        if hit is not None:
            return hit
        f, w = self.f, self.width
        base = bv_resize(bv, w)
        acc = None
        shifted = base
        m = mult
        while m:
            if m & 1:
                acc = shifted if acc is None else bv_add(f, acc, shifted)
            m >>= 1
            if m:
                shifted = bv_resize(bv_shl1(f, shifted), w)
        self._shift_cache[key] = acc
        return acc

    def linear(self, terms: list[tuple[int, BitVec]]) -> BitVec:
        f, w = self.f, self.width
        pos = [self.scaled(bv, c) for c, bv in terms if c > 0]
        neg = [self.scaled(bv, -c) for c, bv in terms if c < 0]

        def total(xs):
            acc = xs[0]
            for x in xs[1:]:
                acc = bv_add(f, acc, x)
            return acc

        if not pos and not neg:
            return bv_const(f, 0, w)
        if not neg:
            return total(pos)
        if not pos:
            return bv_neg(f, total(neg))
        return bv_sub(f, total(pos), total(neg))


def _product_terms(g: RingElem, v: Sequence[BitVec]) -> list[list[tuple[int, BitVec]]]:
    """Linear forms of the four components of ``g * v`` for constant ``g``."""
    al, be, ga, de = g.a, g.b, g.c, g.d
    a, b, c, d = v
    forms = [
        [(al, a), (-be, b), (2 * ga, c), (-2 * de, d)],
        [(be, a), (al, b), (2 * de, c), (2 * ga, d)],
        [(ga, a), (-de, b), (al, c), (-be, d)],
        [(de, a), (ga, b), (be, c), (al, d)],
    ]
    return [[(k, x) for k, x in form if k] for form in forms]


def _check_gate_set(gs: GateSet, policy: WidthPolicy) -> None:
    if not isinstance(policy, str):
        return
    for g in gs:
        bad = validate_gate_for_bound(g)
        if bad is not None:
            raise EncodingError(f"gate outside the width-bound class ({bad}); supply explicit widths")


def encode_instance(p: SynthesisProblem) -> tuple[CnfFormula, VarMap]:
    """Build the CNF for ``p``; raises :class:`InfeasibleError` on a failed precheck."""
    gs, d = p.gate_set, p.depth
    _check_gate_set(gs, p.width_policy)
    cols = _columns(p.target)
    dim = 1 << gs.n

    widths = {(i, col.key): bit_width(i, p.width_policy) + col.extra_bits for i in range(d) for col in cols}

    phases = []
    finals: dict[int, dict[int, tuple[RingElem, ...]]] = {}
    reasons = []
    for k in feasible_phases(p.target, d, p.phase_multiples):
        fc = final_constants(p.target, d, k)
        bad = [
            (key, r, x)
            for key, vec in fc.items()
            for r, e in enumerate(vec)
            for x in e
            if not _fits(x, widths[(d - 1, key)])
        ]
        if bad:
            reasons.append(f"phase {k}: coefficient {bad[0][2]} exceeds width {widths[(d - 1, bad[0][0])]}")
            continue
        phases.append(k)
        finals[k] = fc
    if not phases:
        detail = "; ".join(reasons) if reasons else f"target not in Z[sqrt2,i] after scaling by 2^{d}"
        raise InfeasibleError(f"d={d}, phases {list(p.phase_multiples)}: {detail}")

    f = CnfFormula()
    g = len(gs)
    vm = VarMap(d, g, [f.new_vars(g) for _ in range(d)], column_keys=tuple(c.key for c in cols))
    vm.widths = widths
    for i in range(d):
        exactly_one(f, vm.selectors[i])

    if len(phases) == 1:
        vm.fixed_phase = phases[0]
    else:
        for k in phases:
            vm.phase_selectors[k] = f.new_var()
        exactly_one(f, list(vm.phase_selectors.values()))

    last = d - 1
    for col in cols:
        w_of = lambda i: widths[(i, col.key)]  # noqa: E731

        def alloc(i: int) -> None:
            w = w_of(i)
            for r in range(dim):
                if i == last and vm.fixed_phase is not None:
                    vm.coeffs[(i, r, col.key)] = _const_vec(f, finals[vm.fixed_phase][col.key][r], w)
                else:
                    vm.coeffs[(i, r, col.key)] = tuple(bv_fresh(f, w) for _ in range(4))

        # first gate: constant products
        alloc(0)
        w0 = w_of(0)
        for j, gate in enumerate(gs):
            x = vm.selectors[0][j]
            for r, row in enumerate(gate.sparse_rows):
                val = RingElem()
                for c, e in row:
                    val = val + e * col.start[c]
                if not all(_fits(t, w0) for t in val):
                    raise EncodingError(f"first-step coefficient {val} exceeds width {w0}")
                mine = vm.coeffs[(0, r, col.key)]
                for comp, bv in zip(val, mine):
                    conditional_equal(f, x, bv, bv_const(f, comp, w0))

        for i in range(1, d):
            alloc(i)
            enc = _Encoder(f, w_of(i))
            combo_cache: dict[tuple, tuple[BitVec, ...]] = {}
            for j, gate in enumerate(gs):
                x = vm.selectors[i][j]
                for r, row in enumerate(gate.sparse_rows):
                    key = tuple((c, tuple(e)) for c, e in row)
                    combo = combo_cache.get(key)
                    if combo is None:
                        forms: list[list[tuple[int, BitVec]]] = [[], [], [], []]
                        for c, e in row:
                            for t, form in enumerate(_product_terms(e, vm.coeffs[(i - 1, c, col.key)])):
                                forms[t].extend(form)
                        combo = tuple(enc.linear(form) for form in forms)
                        combo_cache[key] = combo
                    for bv, val in zip(vm.coeffs[(i, r, col.key)], combo):
                        conditional_equal(f, x, bv, val)

        if vm.fixed_phase is None:
            w = w_of(last)
            for k, sel in vm.phase_selectors.items():
                for r in range(dim):
                    target_bits = _const_vec(f, finals[k][col.key][r], w)
                    for bv, tb in zip(vm.coeffs[(last, r, col.key)], target_bits):
                        conditional_equal(f, sel, bv, tb)

    for indices, bound in p.type_bounds:
        xs = [vm.selectors[i][j] for i in range(d) for j in indices]
        at_most_k(f, xs, bound)

    return f, vm


def stats_of(f: CnfFormula, vm: VarMap) -> EncodingStats:
    per_step = tuple(max(w for (i, _), w in vm.widths.items() if i == s) for s in range(vm.depth))
    return EncodingStats(f.num_vars, f.num_clauses, vm.depth, vm.num_gates, per_step)


def encode_state_mapping(
    pairs: Sequence[tuple[Sequence[ScaledRing], Sequence[ScaledRing]]],
    gate_set: GateSet,
    d: int,
    phase_multiples: Sequence[int] = (0,),
    type_bounds: Sequence[tuple[Sequence[int], int]] = (),
    width_policy: WidthPolicy = PROVEN,
) -> tuple[CnfFormula, VarMap]:
    target = StateMapping(tuple((tuple(i), tuple(o)) for i, o in pairs))
    if len(target.pairs[0][0]) != 1 << gate_set.n:
        raise EncodingError(f"vectors of length {len(target.pairs[0][0])} do not match n={gate_set.n}")
    return encode_instance(
        SynthesisProblem(target, gate_set, d, tuple(phase_multiples), tuple(type_bounds), width_policy)
    )
