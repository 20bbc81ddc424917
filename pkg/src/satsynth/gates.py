"""Clifford+T gate library, n-qubit expansion and gate-set construction.

Qubit 0 is the most significant bit of a computational-basis index.  Within
a primitive the first operand is the most significant local bit, so
``CNOT`` on operands ``(c, t)`` has ``c`` as control.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .ring import RingElem, ScaledMatrix, scaled_mat_mul

# doubled entries
_0 = (0, 0, 0, 0)
_2 = (2, 0, 0, 0)
_m2 = (-2, 0, 0, 0)
_2i = (0, 2, 0, 0)
_m2i = (0, -2, 0, 0)
_r2 = (0, 0, 1, 0)
_mr2 = (0, 0, -1, 0)
_w = (0, 0, 1, 1)  # sqrt2 + i sqrt2
_wbar = (0, 0, 1, -1)


def _perm(images: Sequence[int]) -> list[list[tuple]]:
    n = len(images)
    m = [[_0] * n for _ in range(n)]
    for c, r in enumerate(images):
        m[r][c] = _2
    return m


def _diag(entries: Sequence[tuple]) -> list[list[tuple]]:
    n = len(entries)
    return [[entries[r] if r == c else _0 for c in range(n)] for r in range(n)]


_PRIM_TABLE: dict[str, tuple[int, list[list[tuple]]]] = {
    "X": (1, [[_0, _2], [_2, _0]]),
    "Y": (1, [[_0, _m2i], [_2i, _0]]),
    "Z": (1, _diag([_2, _m2])),
    "H": (1, [[_r2, _r2], [_r2, _mr2]]),
    "S": (1, _diag([_2, _2i])),
    "Sdg": (1, _diag([_2, _m2i])),
    "T": (1, _diag([_2, _w])),
    "Tdg": (1, _diag([_2, _wbar])),
    "CNOT": (2, _perm([0, 1, 3, 2])),
    "CZ": (2, _diag([_2, _2, _2, _m2])),
    "TOFFOLI": (3, _perm([0, 1, 2, 3, 4, 5, 7, 6])),
}

PRIMITIVE_NAMES = tuple(_PRIM_TABLE)

_ALIASES = {"CX": "CNOT", "CCX": "TOFFOLI", "CCNOT": "TOFFOLI", "TDG": "Tdg", "SDG": "Sdg", "NOT": "X"}


def canonical_name(name: str) -> str:
    if name in _PRIM_TABLE:
        return name
    key = name.strip().upper()
    key = _ALIASES.get(key, key)
    for known in _PRIM_TABLE:
        if known.upper() == key:
            return known
    raise ValueError(f"unknown gate primitive {name!r}; known: {', '.join(PRIMITIVE_NAMES)}")


@dataclass(frozen=True)
class GatePrim:
    name: str
    arity: int
    doubled_matrix: ScaledMatrix

    @classmethod
    def get(cls, name: str) -> GatePrim:
        name = canonical_name(name)
        arity, m = _PRIM_TABLE[name]
        return cls(name, arity, ScaledMatrix(m, 1))


class GateError(ValueError):
    pass


def _check_operands(operands: Sequence[int], arity: int, n: int) -> tuple[int, ...]:
    ops = tuple(int(q) for q in operands)
    if len(ops) != arity:
        raise GateError(f"expected {arity} operands, got {len(ops)}")
    if len(set(ops)) != len(ops):
        raise GateError(f"duplicate operands {ops}")
    for q in ops:
        if not 0 <= q < n:
            raise GateError(f"operand {q} out of range for n={n}")
    return ops


def expand_to_n(prim: GatePrim, operands: Sequence[int], n: int) -> ScaledMatrix:
    """Tensor extension of ``prim.doubled_matrix`` to ``n`` qubits, scale 1."""
    ops = _check_operands(operands, prim.arity, n)
    dim = 1 << n
    idx = np.arange(dim)
    local = np.zeros(dim, dtype=np.int64)
    for t, q in enumerate(ops):
        local |= ((idx >> (n - 1 - q)) & 1) << (prim.arity - 1 - t)
    op_mask = 0
    for q in ops:
        op_mask |= 1 << (n - 1 - q)
    rest = idx & ~op_mask
    same_rest = rest[:, None] == rest[None, :]
    data = prim.doubled_matrix.data[local[:, None], local[None, :]]
    data = np.where(same_rest[..., None], data, 0).astype(np.int64)
    return ScaledMatrix(data, 1)


@dataclass(frozen=True, eq=False)
class Gate:
    prim: GatePrim
    operands: tuple[int, ...]
    n: int

    @property
    def name(self) -> str:
        return self.prim.name

    @cached_property
    def expanded(self) -> ScaledMatrix:
        return expand_to_n(self.prim, self.operands, self.n)

    @cached_property
    def sparse_rows(self) -> tuple[tuple[tuple[int, RingElem], ...], ...]:
        """Per row, the ``(column, entry)`` pairs of the non-zero entries."""
        m = self.expanded
        return tuple(tuple(m.nonzero_in_row(r)) for r in range(m.rows))

    @property
    def label(self) -> str:
        return f"{self.name} " + ",".join(f"q{q}" for q in self.operands)

    def __repr__(self) -> str:
        return f"Gate({self.label})"


def builtin_gate(name: str, operands: Sequence[int], n: int) -> Gate:
    prim = GatePrim.get(name)
    ops = _check_operands(operands, prim.arity, n)
    return Gate(prim, ops, n)


@dataclass(frozen=True)
class GateSet:
    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise GateError("gate set is empty")
        seen: dict[bytes, int] = {}
        for j, g in enumerate(self.gates):
            if g.n != self.n:
                raise GateError(f"gate {g.label} built for n={g.n}, gate set has n={self.n}")
            key = g.expanded.data.tobytes()
            if key in seen:
                raise GateError(f"gate {j} ({g.label}) duplicates gate {seen[key]}")
            seen[key] = j

    def __len__(self) -> int:
        return len(self.gates)

    def __getitem__(self, j: int) -> Gate:
        return self.gates[j]

    def __iter__(self):
        return iter(self.gates)

    def indices_of(self, names: Iterable[str]) -> list[int]:
        wanted = {canonical_name(x) for x in names}
        return [j for j, g in enumerate(self.gates) if g.name in wanted]

    def index_of(self, name: str, operands: Sequence[int]) -> int:
        name = canonical_name(name)
        ops = tuple(operands)
        for j, g in enumerate(self.gates):
            if g.name == name and g.operands == ops:
                return j
        raise KeyError(f"{name} {ops} not in gate set")


def build_gate_set(
    n: int,
    names: Iterable[str],
    connectivity: Iterable[Sequence[int]] | None = None,
) -> GateSet:
    """Every placement of each primitive on allowed operand tuples.

    Order is primitive order as given, then lexicographic operand tuple.
    Placements whose expanded matrix repeats an earlier one (``CZ(1,0)``
    after ``CZ(0,1)``, swapped Toffoli controls) are dropped.  Connectivity
    is a set of ordered operand tuples and restricts gates of arity >= 2.
    """
    if n < 1:
        raise GateError("n must be >= 1")
    allowed = None if connectivity is None else {tuple(int(q) for q in t) for t in connectivity}
    gates: list[Gate] = []
    seen: set[bytes] = set()
    for name in names:
        prim = GatePrim.get(name)
        for ops in itertools.permutations(range(n), prim.arity):
            if allowed is not None and prim.arity > 1 and ops not in allowed:
                continue
            g = Gate(prim, ops, n)
            key = g.expanded.data.tobytes()
            if key in seen:
                continue
            seen.add(key)
            gates.append(g)
    if not gates:
        raise GateError("no gate placements survive the connectivity filter")
    return GateSet(n, tuple(gates))


# entries allowed by the width bound, as (a, b, c, d)
_SINGLE_OK = {(2, 0, 0, 0), (-2, 0, 0, 0), (0, 2, 0, 0), (0, -2, 0, 0)} | {
    (0, 0, s, t) for s in (1, -1) for t in (1, -1)
}
_PAIR_OK = {(0, 0, 1, 0), (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)} | {
    (s, t, 0, 0) for s in (1, -1) for t in (1, -1)
}


@dataclass(frozen=True)
class BoundViolation:
    gate: str
    row: int
    detail: str

    def __str__(self) -> str:
        return f"{self.gate}: row {self.row}: {self.detail}"


def validate_gate_for_bound(g: Gate | GatePrim) -> BoundViolation | None:
    """None when every row fits the sparse structure the width bound needs."""
    m = g.expanded if isinstance(g, Gate) else g.doubled_matrix
    label = g.label if isinstance(g, Gate) else g.name
    for r in range(m.rows):
        nz = m.nonzero_in_row(r)
        if len(nz) == 1:
            c, e = nz[0]
            if tuple(e) not in _SINGLE_OK:
                return BoundViolation(label, r, f"lone entry {e} at column {c} not in allowed set")
        elif len(nz) == 2:
            for c, e in nz:
                if tuple(e) not in _PAIR_OK:
                    return BoundViolation(label, r, f"entry {e} at column {c} not in allowed pair set")
        else:
            return BoundViolation(label, r, f"{len(nz)} non-zero entries (need 1 or 2)")
    return None


def is_exactly_unitary(m: ScaledMatrix) -> bool:
    """``m m^dagger == 4^scale * I`` in ring arithmetic."""
    prod = scaled_mat_mul(m, m.dagger())
    return prod.equals_exact(ScaledMatrix.identity(m.rows))
