"""Hot numeric kernels.

Each kernel has a loop form compiled with numba and a vectorised numpy
form.  The public names dispatch to the compiled form unless numba is
missing or ``SATSYNTH_NO_NUMBA`` is set; both forms stay importable so
tests and the benchmark can compare them.

Conventions shared by all kernels:

* ring arrays are ``int64`` with a trailing axis of length 4 holding the
  ``(a, b, c, d)`` components of ``a + bi + c*sqrt2 + d*i*sqrt2``;
* clause databases are a flat ``int64`` literal array plus an ``int64``
  array of clause start offsets (length ``n_clauses + 1``);
* reversible ops are rows ``(kind, control1, control2, target)`` over bit
  masks, with kind 0 = NOT, 1 = CNOT, 2 = Toffoli.
"""

from __future__ import annotations

import numpy as np

from ._accel import NUMBA_OK, njit

BACKEND = "numba" if NUMBA_OK else "numpy"


# ---------------------------------------------------------------- ring matmul


def _ring_matmul_loop(A, B):
    r, k, _ = A.shape
    c = B.shape[1]
    out = np.zeros((r, c, 4), dtype=np.int64)
    for i in range(r):
        for m in range(k):
            a0 = A[i, m, 0]
            a1 = A[i, m, 1]
            a2 = A[i, m, 2]
            a3 = A[i, m, 3]
            if a0 == 0 and a1 == 0 and a2 == 0 and a3 == 0:
                continue
            for j in range(c):
                b0 = B[m, j, 0]
                b1 = B[m, j, 1]
                b2 = B[m, j, 2]
                b3 = B[m, j, 3]
                out[i, j, 0] += a0 * b0 - a1 * b1 + 2 * (a2 * b2 - a3 * b3)
                out[i, j, 1] += a0 * b1 + a1 * b0 + 2 * (a2 * b3 + a3 * b2)
                out[i, j, 2] += a0 * b2 + a2 * b0 - a1 * b3 - a3 * b1
                out[i, j, 3] += a2 * b1 + a0 * b3 + a1 * b2 + a3 * b0
    return out


def ring_matmul_numpy(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3 = (A[..., t] for t in range(4))
    b0, b1, b2, b3 = (B[..., t] for t in range(4))
    out = np.empty((A.shape[0], B.shape[1], 4), dtype=np.int64)
    out[..., 0] = a0 @ b0 - a1 @ b1 + 2 * (a2 @ b2 - a3 @ b3)
    out[..., 1] = a0 @ b1 + a1 @ b0 + 2 * (a2 @ b3 + a3 @ b2)
    out[..., 2] = a0 @ b2 + a2 @ b0 - a1 @ b3 - a3 @ b1
    out[..., 3] = a2 @ b1 + a0 @ b3 + a1 @ b2 + a3 @ b0
    return out


# ------------------------------------------------------------ clause checking


def _clauses_satisfied_loop(lits, starts, assignments):
    m = assignments.shape[0]
    n_clauses = starts.shape[0] - 1
    out = np.ones(m, dtype=np.bool_)
    for s in range(m):
        for c in range(n_clauses):
            sat = False
            for p in range(starts[c], starts[c + 1]):
                lit = lits[p]
                v = assignments[s, abs(lit)]
                if (lit > 0 and v) or (lit < 0 and not v):
                    sat = True
                    break
            if not sat:
                out[s] = False
                break
    return out


def clauses_satisfied_numpy(lits, starts, assignments):
    n_clauses = starts.shape[0] - 1
    if n_clauses == 0:
        return np.ones(assignments.shape[0], dtype=bool)
    vals = assignments[:, np.abs(lits)] ^ (lits < 0)
    # reduceat misbehaves on empty segments; empty clauses are never satisfied
    lengths = np.diff(starts)
    sat = np.zeros((assignments.shape[0], n_clauses), dtype=bool)
    nz = lengths > 0
    if nz.any():
        red = np.logical_or.reduceat(vals, starts[:-1][nz], axis=1)
        sat[:, nz] = red
    return sat.all(axis=1)


# ----------------------------------------------------------- unit propagation


def _unit_propagate_loop(lits, starts, assign):
    """Returns (ok, assign); ``assign`` holds -1 unknown / 0 / 1 per variable."""
    a = assign.copy()
    n_clauses = starts.shape[0] - 1
    changed = True
    while changed:
        changed = False
        for c in range(n_clauses):
            unknown = 0
            last = 0
            sat = False
            for p in range(starts[c], starts[c + 1]):
                lit = lits[p]
                v = a[abs(lit)]
                if v < 0:
                    unknown += 1
                    last = lit
                elif (lit > 0) == (v == 1):
                    sat = True
                    break
            if sat:
                continue
            if unknown == 0:
                return False, a
            if unknown == 1:
                a[abs(last)] = 1 if last > 0 else 0
                changed = True
    return True, a


def unit_propagate_numpy(lits, starts, assign):
    a = assign.copy()
    n_clauses = starts.shape[0] - 1
    if n_clauses == 0:
        return True, a
    clause_of = np.repeat(np.arange(n_clauses), np.diff(starts))
    var = np.abs(lits)
    pos = lits > 0
    while True:
        v = a[var]
        known = v >= 0
        true_lit = known & ((v == 1) == pos)
        sat = np.zeros(n_clauses, dtype=bool)
        np.logical_or.at(sat, clause_of, true_lit)
        n_unknown = np.bincount(clause_of, weights=~known, minlength=n_clauses)
        open_ = ~sat
        if np.any(open_ & (n_unknown == 0)):
            return False, a
        units = open_ & (n_unknown == 1)
        if not units.any():
            return True, a
        pick = units[clause_of] & ~known
        uv = var[pick]
        upos = pos[pick]
        # two units disagreeing on one variable is a conflict
        a_true = np.zeros(a.shape[0], dtype=bool)
        a_false = np.zeros(a.shape[0], dtype=bool)
        a_true[uv[upos]] = True
        a_false[uv[~upos]] = True
        if np.any(a_true & a_false):
            return False, a
        a[a_true] = 1
        a[a_false] = 0


# ---------------------------------------------------- reversible simulation


def _simulate_reversible_loop(ops, states):
    out = states.copy()
    for s in range(out.shape[0]):
        x = out[s]
        for g in range(ops.shape[0]):
            kind = ops[g, 0]
            flip = True
            if kind >= 1:
                flip = (x >> ops[g, 1]) & 1 == 1
            if kind == 2 and flip:
                flip = (x >> ops[g, 2]) & 1 == 1
            if flip:
                x ^= np.int64(1) << ops[g, 3]
        out[s] = x
    return out


def simulate_reversible_numpy(ops, states):
    x = states.copy()
    one = np.int64(1)
    for kind, c1, c2, t in ops:
        flip = np.ones(x.shape[0], dtype=bool)
        if kind >= 1:
            flip &= ((x >> c1) & one) == one
        if kind == 2:
            flip &= ((x >> c2) & one) == one
        x[flip] ^= one << t
    return x


if NUMBA_OK:
    ring_matmul_numba = njit(cache=True)(_ring_matmul_loop)
    clauses_satisfied_numba = njit(cache=True)(_clauses_satisfied_loop)
    unit_propagate_numba = njit(cache=True)(_unit_propagate_loop)
    simulate_reversible_numba = njit(cache=True)(_simulate_reversible_loop)

    ring_matmul = ring_matmul_numba
    clauses_satisfied = clauses_satisfied_numba
    unit_propagate = unit_propagate_numba
    simulate_reversible = simulate_reversible_numba
else:
    ring_matmul = ring_matmul_numpy
    clauses_satisfied = clauses_satisfied_numpy
    unit_propagate = unit_propagate_numpy
    simulate_reversible = simulate_reversible_numpy
