"""CNF construction: variables, clauses, cardinality and bit-vector arithmetic.

Literals are DIMACS-style non-zero ints (``-v`` is the negation of ``v``).
Bit-vectors are two's-complement, least significant bit first.  Constant
bits use a single reserved variable forced true by a unit clause; its
negation is the constant false.  Gates on constant inputs are folded at
construction time, so adding a constant costs no adder when it is zero.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels


class CnfError(ValueError):
    pass


class CnfFormula:
    """Append-only clause database with a variable allocator.

    Clauses are stored flat, each terminated by ``0`` as in DIMACS.
    """

    def __init__(self):
        self.num_vars = 0
        self.num_clauses = 0
        self._buf = array("i")
        self._true: int | None = None
        self._has_empty = False

    # variables ------------------------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def new_vars(self, k: int) -> list[int]:
        start = self.num_vars + 1
        self.num_vars += k
        return list(range(start, start + k))

    @property
    def true(self) -> int:
        if self._true is None:
            self._true = self.new_var()
            self._append([self._true])
        return self._true

    @property
    def false(self) -> int:
        return -self.true

    def const_value(self, lit: int) -> bool | None:
        """True/False when ``lit`` is the constant literal, else None."""
        if self._true is None:
            return None
        if lit == self._true:
            return True
        if lit == -self._true:
            return False
        return None

    # clauses --------------------------------------------------------------

    def _append(self, lits: Sequence[int]) -> None:
        self._buf.extend(lits)
        self._buf.append(0)
        self.num_clauses += 1

    def add_clause(self, lits: Iterable[int]) -> None:
        """Add a clause, dropping false constants and skipping tautologies."""
        out: list[int] = []
        seen: set[int] = set()
        for lit in lits:
            lit = int(lit)
            if lit == 0 or abs(lit) > self.num_vars:
                raise CnfError(f"literal {lit} does not reference an allocated variable")
            cv = self.const_value(lit)
            if cv is True or -lit in seen:
                return
            if cv is False or lit in seen:
                continue
            seen.add(lit)
            out.append(lit)
        if not out:
            # every literal was constant false: the instance is contradictory
            self.assert_false()
            return
        self._append(out)

    def assert_false(self) -> None:
        """Append the empty clause."""
        self._has_empty = True
        self._buf.append(0)
        self.num_clauses += 1

    def clauses(self) -> Iterable[list[int]]:
        cur: list[int] = []
        for lit in self._buf:
            if lit == 0:
                yield cur
                cur = []
            else:
                cur.append(lit)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(literals without terminators, clause start offsets)."""
        buf = np.frombuffer(self._buf, dtype=np.int32).astype(np.int64)
        zeros = np.flatnonzero(buf == 0)
        lengths = np.diff(np.concatenate(([-1], zeros))) - 1
        starts = np.concatenate(([0], np.cumsum(lengths))).astype(np.int64)
        return buf[buf != 0], starts

    # I/O ------------------------------------------------------------------

    def to_dimacs(self) -> str:
        header = f"p cnf {self.num_vars} {self.num_clauses}\n"
        if self.num_clauses == 0:
            return header
        buf = self._buf
        if self._has_empty:
            return header + "".join(" ".join(map(str, c + [0])) + "\n" for c in self.clauses())
        body = " ".join(map(str, buf.tolist())).replace(" 0 ", " 0\n")
        return header + body + "\n"

    def write_dimacs(self, path: str | os.PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_dimacs())

    @classmethod
    def from_dimacs(cls, text: str) -> CnfFormula:
        f = cls()
        header_seen = False
        tokens: list[int] = []
        declared = (0, 0)
        for lineno, line in enumerate(text.splitlines(), 1):
            s = line.strip()
            if not s or s.startswith("c") or s.startswith("%"):
                continue
            if s.startswith("p"):
                parts = s.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise CnfError(f"line {lineno}: bad header {s!r}")
                declared = (int(parts[2]), int(parts[3]))
                f.num_vars = declared[0]
                header_seen = True
                continue
            if not header_seen:
                raise CnfError(f"line {lineno}: clause before header")
            for tok in s.split():
                lit = int(tok)
                if lit == 0:
                    if tokens:
                        f._append(tokens)
                    else:
                        f.assert_false()
                    tokens = []
                else:
                    tokens.append(lit)
        if tokens:
            raise CnfError("unterminated final clause")
        if f.num_clauses != declared[1]:
            raise CnfError(f"header declares {declared[1]} clauses, found {f.num_clauses}")
        return f


def read_dimacs(path: str | os.PathLike) -> CnfFormula:
    with open(path) as fh:
        return CnfFormula.from_dimacs(fh.read())


def write_dimacs(f: CnfFormula, path: str | os.PathLike) -> None:
    f.write_dimacs(path)


def parse_model(text: str) -> dict[int, bool]:
    """Collect ``v`` lines of solver output into ``{var: value}``."""
    model: dict[int, bool] = {}
    done = False
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.startswith("v"):
            continue
        for tok in line[1:].split():
            try:
                lit = int(tok)
            except ValueError:
                raise CnfError(f"line {lineno}: malformed model token {tok!r}") from None
            if lit == 0:
                done = True
                continue
            model[abs(lit)] = lit > 0
    if not model and not done:
        raise CnfError("no model lines in solver output")
    return model


# ---------------------------------------------------------------- cardinality


def exactly_one(f: CnfFormula, xs: Sequence[int]) -> None:
    """At-least-one clause plus pairwise at-most-one clauses."""
    if not xs:
        raise CnfError("exactly_one over an empty set")
    f.add_clause(xs)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            f.add_clause([-xs[i], -xs[j]])


def at_most_k(f: CnfFormula, xs: Sequence[int], k: int) -> None:
    """Sequential-counter encoding of ``sum(xs) <= k``."""
    if k < 0:
        raise CnfError("k must be non-negative")
    n = len(xs)
    if k >= n:
        return
    if k == 0:
        for x in xs:
            f.add_clause([-x])
        return
    # s[i][j]: at least j+1 of xs[0..i] are true
    s = [f.new_vars(k) for _ in range(n - 1)]
    f.add_clause([-xs[0], s[0][0]])
    for j in range(1, k):
        f.add_clause([-s[0][j]])
    for i in range(1, n - 1):
        f.add_clause([-xs[i], s[i][0]])
        f.add_clause([-s[i - 1][0], s[i][0]])
        for j in range(1, k):
            f.add_clause([-xs[i], -s[i - 1][j - 1], s[i][j]])
            f.add_clause([-s[i - 1][j], s[i][j]])
        f.add_clause([-xs[i], -s[i - 1][k - 1]])
    f.add_clause([-xs[n - 1], -s[n - 2][k - 1]])


# ----------------------------------------------------------- folded gates


def lit_and(f: CnfFormula, a: int, b: int) -> int:
    ca, cb = f.const_value(a), f.const_value(b)
    if ca is False or cb is False or a == -b:
        return f.false
    if ca is True:
        return b
    if cb is True or a == b:
        return a
    r = f.new_var()
    f.add_clause([-r, a])
    f.add_clause([-r, b])
    f.add_clause([r, -a, -b])
    return r


def lit_or(f: CnfFormula, a: int, b: int) -> int:
    return -lit_and(f, -a, -b)


def lit_xor(f: CnfFormula, a: int, b: int) -> int:
    ca, cb = f.const_value(a), f.const_value(b)
    if ca is not None:
        return -b if ca else b
    if cb is not None:
        return -a if cb else a
    if a == b:
        return f.false
    if a == -b:
        return f.true
    r = f.new_var()
    f.add_clause([-r, a, b])
    f.add_clause([-r, -a, -b])
    f.add_clause([r, -a, b])
    f.add_clause([r, a, -b])
    return r


def lit_xor3(f: CnfFormula, a: int, b: int, c: int) -> int:
    consts = [f.const_value(x) for x in (a, b, c)]
    if any(v is not None for v in consts) or len({abs(a), abs(b), abs(c)}) < 3:
        return lit_xor(f, lit_xor(f, a, b), c)
    r = f.new_var()
    for sa in (1, -1):
        for sb in (1, -1):
            for sc in (1, -1):
                # forbid the assignment a=sa>0, b=sb>0, c=sc>0 with the wrong parity
                parity = (sa > 0) ^ (sb > 0) ^ (sc > 0)
                f.add_clause([-sa * a, -sb * b, -sc * c, r if parity else -r])
    return r


def lit_maj(f: CnfFormula, a: int, b: int, c: int) -> int:
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        cx = f.const_value(x)
        if cx is False:
            return lit_and(f, y, z)
        if cx is True:
            return lit_or(f, y, z)
        if x == y:
            return x
        if x == -y:
            return z
    r = f.new_var()
    f.add_clause([-a, -b, r])
    f.add_clause([-b, -c, r])
    f.add_clause([-a, -c, r])
    f.add_clause([a, b, -r])
    f.add_clause([b, c, -r])
    f.add_clause([a, c, -r])
    return r


# --------------------------------------------------------------- bit-vectors


@dataclass(frozen=True)
class BitVec:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(self.bits))
        if not self.bits:
            raise CnfError("bit-vector width must be >= 1")

    @property
    def width(self) -> int:
        return len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)


def bv_const(f: CnfFormula, value: int, width: int) -> BitVec:
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    if not lo <= value <= hi:
        raise CnfError(f"constant {value} does not fit in {width} signed bits")
    return BitVec(tuple(f.true if (value >> b) & 1 else f.false for b in range(width)))


def bv_fresh(f: CnfFormula, width: int) -> BitVec:
    return BitVec(tuple(f.new_vars(width)))


def bv_const_value(f: CnfFormula, x: BitVec) -> int | None:
    """Integer value when every bit is constant."""
    v = 0
    for b, lit in enumerate(x.bits):
        cv = f.const_value(lit)
        if cv is None:
            return None
        v |= int(cv) << b
    if v >> (x.width - 1):
        v -= 1 << x.width
    return v


def bv_not(x: BitVec) -> BitVec:
    return BitVec(tuple(-b for b in x.bits))


def bv_add(f: CnfFormula, x: BitVec, y: BitVec, carry_in: bool = False) -> BitVec:
    """Ripple-carry sum modulo ``2**width``."""
    if x.width != y.width:
        raise CnfError(f"width mismatch {x.width} vs {y.width}")
    carry = f.true if carry_in else f.false
    out = []
    last = x.width - 1
    for b, (p, q) in enumerate(zip(x.bits, y.bits)):
        out.append(lit_xor3(f, p, q, carry))
        if b < last:
            carry = lit_maj(f, p, q, carry)
    return BitVec(tuple(out))


def bv_sub(f: CnfFormula, x: BitVec, y: BitVec) -> BitVec:
    return bv_add(f, x, bv_not(y), carry_in=True)


def bv_neg(f: CnfFormula, x: BitVec) -> BitVec:
    return bv_add(f, bv_not(x), bv_const(f, 0, x.width), carry_in=True)


def bv_shl1(f: CnfFormula, x: BitVec) -> BitVec:
    return BitVec((f.false,) + x.bits)


def bv_sign_extend(x: BitVec, new_width: int) -> BitVec:
    if new_width < x.width:
        raise CnfError(f"cannot sign-extend width {x.width} down to {new_width}")
    return BitVec(x.bits + (x.bits[-1],) * (new_width - x.width))


def bv_truncate(x: BitVec, width: int) -> BitVec:
    return BitVec(x.bits[:width])


def bv_resize(x: BitVec, width: int) -> BitVec:
    return bv_sign_extend(x, width) if width >= x.width else bv_truncate(x, width)


def conditional_equal(f: CnfFormula, guard: int | None, x: BitVec, y: BitVec) -> None:
    """``guard -> x == y`` bitwise; unconditional when ``guard`` is None."""
    if x.width != y.width:
        raise CnfError(f"width mismatch {x.width} vs {y.width}")
    pre = [] if guard is None else [-guard]
    for p, q in zip(x.bits, y.bits):
        if p == q:
            continue
        f.add_clause(pre + [p, -q])
        f.add_clause(pre + [-p, q])


def bv_model_value(model: Mapping[int, bool], x: BitVec) -> int:
    v = 0
    for b, lit in enumerate(x.bits):
        bit = model[abs(lit)]
        if lit < 0:
            bit = not bit
        v |= int(bit) << b
    if v >> (x.width - 1):
        v -= 1 << x.width
    return v


# ---------------------------------------------------------- toy checking


def propagate(f: CnfFormula, fixed: Mapping[int, bool]) -> tuple[bool, np.ndarray]:
    """Unit propagation from ``fixed``; returns (no conflict, -1/0/1 per variable)."""
    lits, starts = f.as_arrays()
    a = np.full(f.num_vars + 1, -1, dtype=np.int8)
    for v, val in fixed.items():
        a[v] = int(val)
    ok, a = kernels.unit_propagate(lits, starts, a)
    return bool(ok), a


def toy_solve(f: CnfFormula, fixed: Mapping[int, bool] | None = None) -> dict[int, bool] | None:
    """Small DPLL for tests; returns a model or None."""
    lits, starts = f.as_arrays()
    a = np.full(f.num_vars + 1, -1, dtype=np.int8)
    for v, val in (fixed or {}).items():
        a[v] = int(val)

    def rec(a):
        ok, a = kernels.unit_propagate(lits, starts, a)
        if not ok:
            return None
        free = np.flatnonzero(a[1:] < 0)
        if free.size == 0:
            return a
        v = int(free[0]) + 1
        for val in (1, 0):
            b = a.copy()
            b[v] = val
            r = rec(b)
            if r is not None:
                return r
        return None

    res = rec(a)
    if res is None:
        return None
    return {v: bool(res[v]) for v in range(1, f.num_vars + 1)}
