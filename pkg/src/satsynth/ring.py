r"""Exact arithmetic in :math:`\mathbb{Z}[\sqrt2, i]` and its dyadic extension.

An element ``a + b i + c sqrt2 + d i sqrt2`` is stored as four Python ints.
Arithmetic is exact; results whose components leave the signed 64-bit range
raise :class:`OverflowError` so that callers relying on machine-width
encodings never see silent wraparound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

INT64_LIMIT = 1 << 63
SQRT2 = math.sqrt(2.0)


class NotInRing(ValueError):
    """A dyadic value has no representative at the requested scale."""


def _checked(*xs: int) -> None:
    for x in xs:
        if not -INT64_LIMIT <= x < INT64_LIMIT:
            raise OverflowError(f"ring component {x} exceeds 64-bit range")


@dataclass(frozen=True, slots=True)
class RingElem:
    """``a + b*i + c*sqrt2 + d*i*sqrt2`` with integer components."""

    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0

    def __post_init__(self):
        _checked(self.a, self.b, self.c, self.d)

    @classmethod
    def of(cls, t: Sequence[int]) -> RingElem:
        a, b, c, d = (int(x) for x in t)
        return cls(a, b, c, d)

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def __add__(self, o: RingElem) -> RingElem:
        return ring_add(self, o)

    def __sub__(self, o: RingElem) -> RingElem:
        return RingElem(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __neg__(self) -> RingElem:
        return RingElem(-self.a, -self.b, -self.c, -self.d)

    def __mul__(self, o: RingElem | int) -> RingElem:
        if isinstance(o, int):
            return RingElem(self.a * o, self.b * o, self.c * o, self.d * o)
        return ring_mul(self, o)

    __rmul__ = __mul__

    def conj(self) -> RingElem:
        """Complex conjugate (``sqrt2`` is real)."""
        return RingElem(self.a, -self.b, self.c, -self.d)

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def all_even(self) -> bool:
        return not (self.a & 1 or self.b & 1 or self.c & 1 or self.d & 1)

    def half(self) -> RingElem:
        if not self.all_even():
            raise NotInRing(f"{self} is not divisible by 2")
        return RingElem(self.a >> 1, self.b >> 1, self.c >> 1, self.d >> 1)

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c},{self.d})"


ZERO = RingElem()
ONE = RingElem(1)
I = RingElem(0, 1)
ROOT2 = RingElem(0, 0, 1)


def ring_add(u: RingElem, v: RingElem) -> RingElem:
    return RingElem(u.a + v.a, u.b + v.b, u.c + v.c, u.d + v.d)


def ring_mul(u: RingElem, v: RingElem) -> RingElem:
    a, b, c, d = u.a, u.b, u.c, u.d
    e, f, g, h = v.a, v.b, v.c, v.d
    return RingElem(
        a * e - b * f + 2 * (c * g - d * h),
        a * f + b * e + 2 * (c * h + d * g),
        a * g + c * e - b * h - d * f,
        c * f + a * h + b * g + d * e,
    )


def norm_sq(u: RingElem) -> int:
    """``a^2 + b^2 + 2c^2 + 2d^2``; zero iff ``u`` is zero.

    This is the quantity the bounding argument calls the norm.  Scaling
    identities hold for it at the squared level, e.g.
    ``norm_sq(2u) == 4 * norm_sq(u)``.
    """
    return u.a * u.a + u.b * u.b + 2 * (u.c * u.c + u.d * u.d)


def to_complex(u: RingElem, scale: int = 0) -> complex:
    re = u.a + u.c * SQRT2
    im = u.b + u.d * SQRT2
    f = 2.0 ** (-scale)
    return complex(re * f, im * f)


@dataclass(frozen=True, slots=True)
class ScaledRing:
    """``value / 2**scale``; always canonical after construction."""

    value: RingElem
    scale: int = 0

    def __post_init__(self):
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        v, k = self.value, self.scale
        while k > 0 and v.all_even():
            v = v.half()
            k -= 1
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "scale", k if not v.is_zero() else 0)

    def __mul__(self, o: ScaledRing) -> ScaledRing:
        return ScaledRing(ring_mul(self.value, o.value), self.scale + o.scale)

    def __add__(self, o: ScaledRing) -> ScaledRing:
        k = max(self.scale, o.scale)
        return ScaledRing(rescale_to(self, k) + rescale_to(o, k), k)

    def conj(self) -> ScaledRing:
        return ScaledRing(self.value.conj(), self.scale)

    def __complex__(self) -> complex:
        return to_complex(self.value, self.scale)


_PHASES = (
    ScaledRing(RingElem(1, 0, 0, 0), 0),
    ScaledRing(RingElem(0, 0, 1, 1), 1),
    ScaledRing(RingElem(0, 1, 0, 0), 0),
    ScaledRing(RingElem(0, 0, -1, 1), 1),
    ScaledRing(RingElem(-1, 0, 0, 0), 0),
    ScaledRing(RingElem(0, 0, -1, -1), 1),
    ScaledRing(RingElem(0, -1, 0, 0), 0),
    ScaledRing(RingElem(0, 0, 1, -1), 1),
)


def phase_factor(k: int) -> ScaledRing:
    """Exact ``exp(i k pi / 4)``."""
    if not 0 <= k < 8:
        raise ValueError(f"phase multiple must be in 0..7, got {k}")
    return _PHASES[k]


def rescale_to(entry: ScaledRing, k: int) -> RingElem:
    """``entry * 2**k`` as a ring element; raises :class:`NotInRing` if fractional."""
    if k < entry.scale:
        raise NotInRing(f"{entry.value}/2^{entry.scale} has no ring value at scale {k}")
    return entry.value * (1 << (k - entry.scale))


# --------------------------------------------------------------------- matrices


def _as_ring_array(entries) -> np.ndarray:
    rows = [[tuple(e) for e in row] for row in entries]
    out = np.zeros((len(rows), len(rows[0]) if rows else 0, 4), dtype=np.int64)
    for r, row in enumerate(rows):
        if len(row) != out.shape[1]:
            raise ValueError(f"ragged matrix: row {r} has {len(row)} entries")
        for c, e in enumerate(row):
            if len(e) != 4:
                raise ValueError(f"entry ({r},{c}) must have 4 integer components")
            for t, x in enumerate(e):
                if isinstance(x, bool) or not isinstance(x, (int, np.integer)):
                    raise TypeError(f"entry ({r},{c}) component {t} is not an integer: {x!r}")
                _checked(int(x))
                out[r, c, t] = int(x)
    return out


class ScaledMatrix:
    """Matrix over the ring divided by ``2**scale``.

    ``data`` is an immutable ``int64`` array of shape ``(rows, cols, 4)``.
    Products add scales and never canonicalize, so a product of ``d``
    doubled gates has scale ``d``.
    """

    __slots__ = ("data", "scale")

    def __init__(self, entries, scale: int = 0):
        if isinstance(entries, np.ndarray) and entries.dtype == np.int64:
            data = entries.copy()
        else:
            data = _as_ring_array(entries)
        if data.ndim != 3 or data.shape[2] != 4:
            raise ValueError(f"expected (rows, cols, 4) entries, got shape {data.shape}")
        if scale < 0:
            raise ValueError("scale must be non-negative")
        data.flags.writeable = False
        self.data = data
        self.scale = int(scale)

    @classmethod
    def identity(cls, dim: int, scale: int = 0) -> ScaledMatrix:
        data = np.zeros((dim, dim, 4), dtype=np.int64)
        data[np.arange(dim), np.arange(dim), 0] = 1 << scale
        return cls(data, scale)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[0], self.data.shape[1]

    def entry(self, r: int, c: int) -> RingElem:
        return RingElem.of(self.data[r, c])

    def scaled_entry(self, r: int, c: int) -> ScaledRing:
        return ScaledRing(self.entry(r, c), self.scale)

    def column(self, c: int) -> list[RingElem]:
        return [self.entry(r, c) for r in range(self.rows)]

    def nonzero_in_row(self, r: int) -> list[tuple[int, RingElem]]:
        row = self.data[r]
        return [(int(c), RingElem.of(row[c])) for c in np.flatnonzero(row.any(axis=1))]

    def dagger(self) -> ScaledMatrix:
        d = self.data.transpose(1, 0, 2).copy()
        d[..., 1] *= -1
        d[..., 3] *= -1
        return ScaledMatrix(d, self.scale)

    def max_abs(self) -> int:
        return int(np.abs(self.data).max()) if self.data.size else 0

    def __matmul__(self, other: ScaledMatrix) -> ScaledMatrix:
        return scaled_mat_mul(self, other)

    def times(self, u: RingElem) -> ScaledMatrix:
        """Multiply every entry by the ring element ``u`` (scale unchanged)."""
        out = [[tuple(ring_mul(u, self.entry(r, c))) for c in range(self.cols)] for r in range(self.rows)]
        return ScaledMatrix(out, self.scale)

    def to_complex(self) -> np.ndarray:
        d = self.data.astype(np.float64)
        re = d[..., 0] + SQRT2 * d[..., 2]
        im = d[..., 1] + SQRT2 * d[..., 3]
        return (re + 1j * im) * 2.0 ** (-self.scale)

    def kron(self, other: ScaledMatrix) -> ScaledMatrix:
        r1, c1 = self.shape
        r2, c2 = other.shape
        out = np.zeros((r1 * r2, c1 * c2, 4), dtype=np.int64)
        for i in range(r1):
            for j in range(c1):
                if not self.data[i, j].any():
                    continue
                block = scaled_mat_mul(
                    ScaledMatrix(self.data[i : i + 1, j : j + 1], 0),
                    ScaledMatrix(other.data.reshape(1, r2 * c2, 4), 0),
                )
                out[i * r2 : (i + 1) * r2, j * c2 : (j + 1) * c2] = block.data.reshape(r2, c2, 4)
        return ScaledMatrix(out, self.scale + other.scale)

    def equals_exact(self, other: ScaledMatrix) -> bool:
        """Equality of the denoted complex matrices (scales may differ)."""
        if self.shape != other.shape:
            return False
        k = max(self.scale, other.scale)
        a = self.data * (1 << (k - self.scale))
        b = other.data * (1 << (k - other.scale))
        return bool(np.array_equal(a, b))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScaledMatrix):
            return NotImplemented
        return self.scale == other.scale and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.scale, self.data.tobytes(), self.data.shape))

    def __repr__(self) -> str:
        return f"ScaledMatrix(shape={self.shape}, scale={self.scale})"


def _product_bound(A: np.ndarray, B: np.ndarray) -> int:
    ma = int(np.abs(A).max()) if A.size else 0
    mb = int(np.abs(B).max()) if B.size else 0
    # each output component sums k terms of at most six component products
    return 6 * A.shape[1] * ma * mb


def scaled_mat_mul(A: ScaledMatrix, B: ScaledMatrix) -> ScaledMatrix:
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    if _product_bound(A.data, B.data) >= INT64_LIMIT:
        raise OverflowError("ring matrix product may exceed 64-bit components")
    return ScaledMatrix(kernels.ring_matmul(A.data, B.data), A.scale + B.scale)


def matrix_from_scaled(entries: Iterable[Iterable[ScaledRing]]) -> ScaledMatrix:
    """Pack a grid of :class:`ScaledRing` values at their common scale."""
    grid = [list(row) for row in entries]
    k = max((e.scale for row in grid for e in row), default=0)
    return ScaledMatrix([[tuple(rescale_to(e, k)) for e in row] for row in grid], k)
