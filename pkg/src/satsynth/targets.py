"""Synthesis targets: full/column-masked matrices and state mappings.

Target file format (JSON, integers only)::

    {"kind": "matrix", "n": 2, "scale": 1,
     "entries": [[[a, b, c, d], ...], ...],      # 2^n x 2^n grid
     "kept_columns": [0, 2]}                      # optional

    {"kind": "states", "n": 1,
     "pairs": [{"input":  {"scale": 0, "entries": [[1,0,0,0], [0,0,0,0]]},
                "output": {"scale": 0, "entries": [[0,0,0,0], [1,0,0,0]]}}]}

Entry ``[a, b, c, d]`` at scale ``k`` denotes ``(a + bi + c√2 + di√2) / 2^k``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Iterable, Union

from .gates import GatePrim, builtin_gate
from .ring import RingElem, ScaledMatrix, ScaledRing, rescale_to, ring_mul, scaled_mat_mul


class TargetError(ValueError):
    pass


@dataclass(frozen=True)
class MatrixTarget:
    """Full unitary target; ``kept_columns`` None means every column."""

    matrix: ScaledMatrix
    kept_columns: tuple[int, ...] | None = None

    @property
    def n(self) -> int:
        return self.matrix.rows.bit_length() - 1

    def columns(self) -> tuple[int, ...]:
        if self.kept_columns is None:
            return tuple(range(self.matrix.cols))
        return self.kept_columns


@dataclass(frozen=True)
class StateMapping:
    """Pairs of (input vector, output vector) of :class:`ScaledRing` entries."""

    pairs: tuple[tuple[tuple[ScaledRing, ...], tuple[ScaledRing, ...]], ...]

    def __post_init__(self):
        pairs = tuple((tuple(i), tuple(o)) for i, o in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise TargetError("state mapping needs at least one pair")
        dim = len(pairs[0][0])
        for s, (i, o) in enumerate(pairs):
            if len(i) != dim or len(o) != dim:
                raise TargetError(f"pair {s}: vector lengths {len(i)}/{len(o)} differ from {dim}")
        if dim & (dim - 1):
            raise TargetError(f"vector length {dim} is not a power of two")

    @property
    def n(self) -> int:
        return len(self.pairs[0][0]).bit_length() - 1


TargetSpec = Union[MatrixTarget, StateMapping]


def mask_columns(matrix: ScaledMatrix, clean_qubits: Iterable[int]) -> MatrixTarget:
    """Keep only columns whose basis index has every clean qubit at 0."""
    n = matrix.rows.bit_length() - 1
    mask = 0
    for q in clean_qubits:
        if not 0 <= q < n:
            raise TargetError(f"clean qubit {q} out of range for n={n}")
        mask |= 1 << (n - 1 - q)
    kept = tuple(c for c in range(matrix.cols) if not c & mask)
    if not kept:
        raise TargetError("all columns masked")
    return MatrixTarget(matrix, None if mask == 0 else kept)


def with_ancillas(matrix: ScaledMatrix, clean: int = 0, dirty: int = 0) -> MatrixTarget:
    """``U`` tensored with identity on appended ancillas, clean ones masked.

    Dirty ancillas come first after the data qubits, clean ones last.
    """
    extra = clean + dirty
    m = matrix if extra == 0 else matrix.kron(ScaledMatrix.identity(1 << extra))
    n = m.rows.bit_length() - 1
    return mask_columns(m, range(n - clean, n))


# ------------------------------------------------------------ exact checks


def _inner(u: Iterable[ScaledRing], v: Iterable[ScaledRing]) -> ScaledRing:
    acc = ScaledRing(RingElem())
    for x, y in zip(u, v):
        acc = acc + ScaledRing(ring_mul(x.value.conj(), y.value), x.scale + y.scale)
    return acc


def check_unitary(target: MatrixTarget) -> None:
    """Kept columns must be orthonormal, exactly."""
    m = target.matrix
    if m.rows != m.cols or m.rows & (m.rows - 1):
        raise TargetError(f"matrix must be square with power-of-two size, got {m.shape}")
    cols = target.columns()
    sub = ScaledMatrix(m.data[:, list(cols)], m.scale)
    gram = scaled_mat_mul(sub.dagger(), sub)
    if not gram.equals_exact(ScaledMatrix.identity(len(cols))):
        raise TargetError("target columns are not orthonormal (matrix is not unitary)")


def check_state_mapping(target: StateMapping) -> None:
    """Inner products between inputs must equal those between outputs."""
    for s, (i1, o1) in enumerate(target.pairs):
        for t, (i2, o2) in enumerate(target.pairs[s:], start=s):
            if _inner(i1, i2) != _inner(o1, o2):
                raise TargetError(f"pairs {s},{t}: mapping does not preserve inner products")


# --------------------------------------------------------------- builtins


def _gate(name: str, ops, n: int) -> ScaledMatrix:
    return builtin_gate(name, ops, n).expanded


def _product(*ms: ScaledMatrix) -> ScaledMatrix:
    """Product applying ``ms[0]`` first."""
    acc = ms[0]
    for m in ms[1:]:
        acc = scaled_mat_mul(m, acc)
    return acc


def ghz_mapping(n: int) -> StateMapping:
    dim = 1 << n
    zero = ScaledRing(RingElem())
    inp = [ScaledRing(RingElem(1))] + [zero] * (dim - 1)
    amp = ScaledRing(RingElem(0, 0, 1, 0), 1)  # 1/sqrt2
    out = [zero] * dim
    out[0] = amp
    out[-1] = amp
    return StateMapping(((tuple(inp), tuple(out)),))


def basis_mapping(n: int, pairs: Iterable[tuple[int, int]]) -> StateMapping:
    dim = 1 << n
    zero, one = ScaledRing(RingElem()), ScaledRing(RingElem(1))

    def e(k):
        return tuple(one if r == k else zero for r in range(dim))

    return StateMapping(tuple((e(a), e(b)) for a, b in pairs))


BUILTIN_NAMES = ("toffoli", "and", "swap", "fredkin", "ghz:N")


def builtin_target(name: str) -> MatrixTarget | StateMapping:
    key = name.strip().lower()
    if key == "toffoli":
        return MatrixTarget(GatePrim.get("TOFFOLI").doubled_matrix)
    if key == "and":
        return mask_columns(GatePrim.get("TOFFOLI").doubled_matrix, [2])
    if key == "swap":
        return MatrixTarget(_product(_gate("CNOT", (0, 1), 2), _gate("CNOT", (1, 0), 2), _gate("CNOT", (0, 1), 2)))
    if key == "fredkin":
        return MatrixTarget(_product(_gate("CNOT", (2, 1), 3), _gate("TOFFOLI", (0, 1, 2), 3), _gate("CNOT", (2, 1), 3)))
    if key.startswith("ghz:"):
        try:
            n = int(key[4:])
        except ValueError:
            raise TargetError(f"bad GHZ size in {name!r}") from None
        if n < 1:
            raise TargetError("GHZ size must be >= 1")
        return ghz_mapping(n)
    raise TargetError(f"unknown builtin target {name!r}; known: {', '.join(BUILTIN_NAMES)}")


# ------------------------------------------------------------------- files


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise TargetError(f"{where}: expected an integer, got {x!r}")
    return x


def _entry(e: Any, where: str) -> tuple[int, int, int, int]:
    if not isinstance(e, list) or len(e) != 4:
        raise TargetError(f"{where}: expected [a, b, c, d], got {e!r}")
    return tuple(_int(x, f"{where}[{t}]") for t, x in enumerate(e))


def _scale(x: Any, where: str) -> int:
    k = _int(x, where)
    if k < 0:
        raise TargetError(f"{where}: scale must be >= 0")
    return k


def _vector(obj: Any, dim: int, where: str) -> tuple[ScaledRing, ...]:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise TargetError(f"{where}: expected an object with 'scale' and 'entries'")
    k = _scale(obj.get("scale", 0), f"{where}.scale")
    ents = obj["entries"]
    if not isinstance(ents, list) or len(ents) != dim:
        raise TargetError(f"{where}.entries: expected {dim} entries")
    return tuple(ScaledRing(RingElem(*_entry(e, f"{where}.entries[{r}]")), k) for r, e in enumerate(ents))


def target_from_json(obj: Any, check: bool = True) -> MatrixTarget | StateMapping:
    if not isinstance(obj, dict):
        raise TargetError("target file must hold a JSON object")
    kind = obj.get("kind", "matrix")
    n = _int(obj.get("n"), "n")
    if n < 1:
        raise TargetError("n must be >= 1")
    dim = 1 << n
    if kind == "matrix":
        k = _scale(obj.get("scale", 0), "scale")
        rows = obj.get("entries")
        if not isinstance(rows, list) or len(rows) != dim:
            raise TargetError(f"entries: expected {dim} rows for n={n}")
        grid = []
        for r, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != dim:
                raise TargetError(f"entries[{r}]: expected {dim} columns")
            grid.append([_entry(e, f"entries[{r}][{c}]") for c, e in enumerate(row)])
        kept = obj.get("kept_columns")
        if kept is not None:
            kept = tuple(_int(c, "kept_columns") for c in kept)
            if not kept or any(not 0 <= c < dim for c in kept):
                raise TargetError("kept_columns must be non-empty column indices")
        t: MatrixTarget | StateMapping = MatrixTarget(ScaledMatrix(grid, k), kept)
        if check:
            check_unitary(t)
        return t
    if kind == "states":
        pairs = obj.get("pairs")
        if not isinstance(pairs, list) or not pairs:
            raise TargetError("pairs: expected a non-empty list")
        out = []
        for s, p in enumerate(pairs):
            if not isinstance(p, dict):
                raise TargetError(f"pairs[{s}]: expected an object")
            out.append((_vector(p.get("input"), dim, f"pairs[{s}].input"), _vector(p.get("output"), dim, f"pairs[{s}].output")))
        t = StateMapping(tuple(out))
        if check:
            check_state_mapping(t)
        return t
    raise TargetError(f"unknown target kind {kind!r}")


def _vec_json(vec: Iterable[ScaledRing]) -> dict:
    vec = list(vec)
    k = max(e.scale for e in vec)
    return {"scale": k, "entries": [list(rescale_to(e, k)) for e in vec]}


def target_to_json(t: MatrixTarget | StateMapping) -> dict:
    if isinstance(t, MatrixTarget):
        m = t.matrix
        ents = [[m.scaled_entry(r, c) for c in range(m.cols)] for r in range(m.rows)]
        k = max(e.scale for row in ents for e in row)
        grid = [[list(rescale_to(e, k)) for e in row] for row in ents]
        obj = {"kind": "matrix", "n": t.n, "scale": k, "entries": grid}
        if t.kept_columns is not None:
            obj["kept_columns"] = list(t.kept_columns)
        return obj
    return {
        "kind": "states",
        "n": t.n,
        "pairs": [{"input": _vec_json(i), "output": _vec_json(o)} for i, o in t.pairs],
    }


def read_target(path: str | os.PathLike, check: bool = True) -> MatrixTarget | StateMapping:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise TargetError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    try:
        return target_from_json(obj, check)
    except TargetError as exc:
        raise TargetError(f"{path}: {exc}") from None


def write_target(t: MatrixTarget | StateMapping, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(target_to_json(t), fh)
        fh.write("\n")
