import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satsynth import kernels
from satsynth.ring import (
    NotInRing,
    RingElem,
    ScaledMatrix,
    ScaledRing,
    norm_sq,
    phase_factor,
    rescale_to,
    ring_add,
    ring_mul,
    scaled_mat_mul,
    to_complex,
)

comp = st.integers(-1000, 1000)
elems = st.builds(RingElem, comp, comp, comp, comp)

R = RingElem
SQRT2 = R(0, 0, 1, 0)
I_SQRT2 = R(0, 0, 0, 1)


@pytest.mark.parametrize(
    "u, v, want",
    [
        ((1, 0, 0, 0), (0, 0, 0, 0), (1, 0, 0, 0)),
        ((1, 1, 0, 0), (0, 0, 1, 1), (1, 1, 1, 1)),
        ((3, -2, 5, 1), (-3, 2, -5, -1), (0, 0, 0, 0)),
    ],
)
def test_add_examples(u, v, want):
    assert ring_add(R(*u), R(*v)) == R(*want)


@pytest.mark.parametrize(
    "u, v, want",
    [
        ((1, 1, 0, 0), (1, -1, 0, 0), (2, 0, 0, 0)),
        ((0, 0, 1, 0), (0, 0, 1, 0), (2, 0, 0, 0)),
        ((0, 0, 1, 1), (0, 0, 1, 1), (0, 4, 0, 0)),
    ],
)
def test_mul_examples(u, v, want):
    assert ring_mul(R(*u), R(*v)) == R(*want)


@pytest.mark.parametrize("u, want", [((1, 0, 0, 0), 1), ((0, 0, 1, 0), 2), ((1, 1, 1, 1), 6), ((0, 0, 0, 0), 0)])
def test_norm_sq_examples(u, want):
    assert norm_sq(R(*u)) == want


def test_to_complex_examples():
    assert to_complex(R(2), 1) == 1.0
    assert abs(to_complex(R(0, 0, 1, 1), 1) - cmath.exp(1j * math.pi / 4)) < 1e-12
    assert to_complex(R(0, 4), 0) == 4j


def test_phase_factor_examples_and_powers():
    assert phase_factor(0) == ScaledRing(R(1), 0)
    assert phase_factor(2) == ScaledRing(R(0, 1), 0)
    assert phase_factor(1) == ScaledRing(R(0, 0, 1, 1), 1)
    for k in range(8):
        assert abs(complex(phase_factor(k)) - cmath.exp(1j * k * math.pi / 4)) < 1e-12
        acc = ScaledRing(R(1))
        for _ in range(8):
            acc = acc * phase_factor(k)
        assert acc == ScaledRing(R(1))
    with pytest.raises(ValueError):
        phase_factor(8)


def test_rescale_to_examples():
    assert rescale_to(ScaledRing(R(1), 1), 3) == R(4)
    with pytest.raises(NotInRing):
        rescale_to(ScaledRing(R(1), 1), 0)
    assert rescale_to(ScaledRing(R(0, 0, 1, 1), 1), 1) == R(0, 0, 1, 1)


def test_scaled_ring_canonical_form():
    x = ScaledRing(R(4, 2, 0, 6), 3)
    assert (x.value, x.scale) == (R(2, 1, 0, 3), 2)
    assert ScaledRing(R(8), 2) == ScaledRing(R(2), 0)
    assert ScaledRing(R(), 5).scale == 0
    # 1/2 + 1/2 == 1
    half = ScaledRing(R(1), 1)
    assert half + half == ScaledRing(R(1))


def _mat(rows, scale=0):
    return ScaledMatrix([[tuple(e) for e in row] for row in rows], scale)


H2 = _mat([[(0, 0, 1, 0), (0, 0, 1, 0)], [(0, 0, 1, 0), (0, 0, -1, 0)]], 1)
T2 = _mat([[(2, 0, 0, 0), (0, 0, 0, 0)], [(0, 0, 0, 0), (0, 0, 1, 1)]], 1)


def test_scaled_mat_mul_examples():
    hh = scaled_mat_mul(H2, H2)
    assert hh.scale == 2
    np.testing.assert_array_equal(hh.data, np.array([[[4, 0, 0, 0], [0] * 4], [[0] * 4, [4, 0, 0, 0]]]))
    tt = scaled_mat_mul(T2, T2)
    np.testing.assert_array_equal(tt.data[1, 1], [0, 4, 0, 0])
    np.testing.assert_array_equal(tt.data[0, 0], [4, 0, 0, 0])
    same = scaled_mat_mul(H2, ScaledMatrix.identity(2))
    assert same.scale == 1 and np.array_equal(same.data, H2.data)
    with pytest.raises(ValueError):
        scaled_mat_mul(H2, ScaledMatrix.identity(4))


def test_overflow_is_reported_not_wrapped():
    big = R(2**62, 0, 0, 0)
    with pytest.raises(OverflowError):
        ring_mul(big, R(4))
    m = _mat([[(2**61, 0, 0, 0)]])
    with pytest.raises(OverflowError):
        scaled_mat_mul(m, m)


def test_matmul_kernels_agree():
    rng = np.random.default_rng(7)
    A = rng.integers(-50, 50, size=(5, 6, 4))
    B = rng.integers(-50, 50, size=(6, 3, 4))
    ref = np.zeros((5, 3, 4), dtype=np.int64)
    for i in range(5):
        for j in range(3):
            acc = R()
            for k in range(6):
                acc = acc + ring_mul(R.of(A[i, k]), R.of(B[k, j]))
            ref[i, j] = tuple(acc)
    np.testing.assert_array_equal(kernels.ring_matmul_numpy(A, B), ref)
    np.testing.assert_array_equal(kernels.ring_matmul(A, B), ref)


@settings(max_examples=300, deadline=None)
@given(elems, elems, elems)
def test_ring_laws(u, v, w):
    assert ring_mul(ring_mul(u, v), w) == ring_mul(u, ring_mul(v, w))
    assert ring_mul(u, v) == ring_mul(v, u)
    assert ring_mul(u, ring_add(v, w)) == ring_add(ring_mul(u, v), ring_mul(u, w))
    assert ring_add(u, -u) == R()
    assert ring_mul(u, R(1)) == u


@settings(max_examples=300, deadline=None)
@given(elems, elems)
def test_float_cross_check(u, v):
    zu, zv = to_complex(u), to_complex(v)
    assert abs(to_complex(ring_mul(u, v)) - zu * zv) <= 1e-9 * (1 + abs(zu) * abs(zv))


@settings(max_examples=300, deadline=None)
@given(elems)
def test_norm_sq_scaling_identities(u):
    n = norm_sq(u)
    assert norm_sq(ring_mul(R(2), u)) == 4 * n
    assert norm_sq(ring_mul(R(0, 1), u)) == n
    assert norm_sq(ring_mul(SQRT2, u)) == 2 * n
    assert norm_sq(ring_mul(I_SQRT2, u)) == 2 * n
    assert norm_sq(ring_mul(R(1, 1), u)) == 2 * n
    assert norm_sq(ring_mul(R(1, -1), u)) == 2 * n
    assert norm_sq(ring_mul(R(0, 0, 1, 1), u)) == 4 * n
    assert norm_sq(ring_mul(R(0, 0, 1, -1), u)) == 4 * n
    assert (n == 0) == u.is_zero()


@settings(max_examples=300, deadline=None)
@given(elems, elems)
def test_norm_triangle_inequality(u, v):
    # sqrt(N(u+v)) <= sqrt(N(u)) + sqrt(N(v))  <=>  N(u+v) - N(u) - N(v) <= 2 sqrt(N(u) N(v))
    lhs = norm_sq(ring_add(u, v)) - norm_sq(u) - norm_sq(v)
    assert lhs <= 0 or lhs * lhs <= 4 * norm_sq(u) * norm_sq(v)


def test_conjugate_and_dagger():
    u = R(1, 2, 3, 4)
    assert to_complex(u.conj()) == pytest.approx(to_complex(u).conjugate())
    d = T2.dagger()
    np.testing.assert_allclose(d.to_complex(), T2.to_complex().conj().T)
