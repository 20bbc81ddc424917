"""Compare the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is checked for agreement first, then timed on both paths after
a warmup call (which absorbs numba compilation).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from satsynth import kernels
from satsynth.cnf import CnfFormula, at_most_k, bv_add, bv_fresh, exactly_one


def _time(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def _cases(rng):
    A = rng.integers(-(1 << 20), 1 << 20, size=(32, 32, 4))
    B = rng.integers(-(1 << 20), 1 << 20, size=(32, 32, 4))
    yield "ring_matmul 32x32", kernels.ring_matmul_numpy, getattr(kernels, "ring_matmul_numba", None), (A, B)

    f = CnfFormula()
    xs = f.new_vars(40)
    exactly_one(f, xs[:20])
    at_most_k(f, xs[20:], 5)
    bv_add(f, bv_fresh(f, 16), bv_fresh(f, 16))
    lits, starts = f.as_arrays()
    asg = rng.integers(0, 2, size=(2000, f.num_vars + 1)).astype(np.int8)
    yield (f"clauses_satisfied {f.num_clauses} clauses x 2000", kernels.clauses_satisfied_numpy,
           getattr(kernels, "clauses_satisfied_numba", None), (lits, starts, asg))

    a = np.full(f.num_vars + 1, -1, dtype=np.int8)
    a[xs[0]] = 1
    yield "unit_propagate", kernels.unit_propagate_numpy, getattr(kernels, "unit_propagate_numba", None), (lits, starts, a)

    ops = np.column_stack([
        rng.integers(0, 3, 200), rng.integers(0, 8, 200), rng.integers(8, 16, 200), rng.integers(16, 24, 200),
    ]).astype(np.int64)
    states = rng.integers(0, 1 << 24, size=100_000).astype(np.int64)
    yield ("simulate_reversible 200 ops x 1e5", kernels.simulate_reversible_numpy,
           getattr(kernels, "simulate_reversible_numba", None), (ops, states))


def _same(x, y):
    if isinstance(x, tuple):
        return x[0] == y[0] and np.array_equal(x[1], y[1])
    return np.array_equal(x, y)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<44} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, np_fn, nb_fn, fn_args in _cases(rng):
        t_np = _time(np_fn, fn_args, args.repeat)
        if nb_fn is None:
            print(f"{name:<44} {t_np * 1e3:>10.3f} {'n/a':>10} {'':>8}")
            continue
        if not _same(np_fn(*fn_args), nb_fn(*fn_args)):
            raise SystemExit(f"{name}: numba and numpy results differ")
        t_nb = _time(nb_fn, fn_args, args.repeat)
        print(f"{name:<44} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
