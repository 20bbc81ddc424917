import itertools

import numpy as np
import pytest

from oracles import gate_matrix
from satsynth.gates import (
    PRIMITIVE_NAMES,
    GateError,
    GatePrim,
    GateSet,
    build_gate_set,
    builtin_gate,
    is_exactly_unitary,
    validate_gate_for_bound,
)
from satsynth.ring import RingElem, ScaledMatrix

CLIFFORD_T = ("X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "CNOT", "CZ", "TOFFOLI")


def test_doubled_T_matrix():
    g = builtin_gate("T", [0], 1)
    m = g.expanded
    assert m.scale == 1
    assert m.entry(0, 0) == RingElem(2) and m.entry(1, 1) == RingElem(0, 0, 1, 1)
    assert m.entry(0, 1).is_zero() and m.entry(1, 0).is_zero()


def test_doubled_H_matrix():
    m = builtin_gate("H", [0], 1).expanded
    assert {tuple(m.entry(r, c)) for r in range(2) for c in range(2)} == {(0, 0, 1, 0), (0, 0, -1, 0)}
    assert tuple(m.entry(1, 1)) == (0, 0, -1, 0)


def test_doubled_CNOT_is_twice_a_permutation():
    m = builtin_gate("CNOT", [0, 1], 2).expanded
    want = np.zeros((4, 4), dtype=np.int64)
    for c, r in enumerate([0, 1, 3, 2]):
        want[r, c] = 2
    np.testing.assert_array_equal(m.data[..., 0], want)
    assert not m.data[..., 1:].any()


def test_H_on_qubit_1_is_block_diagonal():
    m = builtin_gate("H", [1], 2).expanded.to_complex()
    h = builtin_gate("H", [0], 1).expanded.to_complex()
    np.testing.assert_allclose(m, np.kron(np.eye(2), h), atol=1e-12)


def test_CNOT_0_2_permutes_upper_rows():
    m = builtin_gate("CNOT", [0, 2], 3).expanded.data[..., 0]
    np.testing.assert_array_equal(m[:4, :4], 2 * np.eye(4, dtype=np.int64))
    np.testing.assert_array_equal(np.argmax(m[:, 4:], axis=0), [5, 4, 7, 6])


@pytest.mark.parametrize("n", [1, 2, 3])
def test_expansion_matches_float_construction(n):
    for name in CLIFFORD_T:
        prim = GatePrim.get(name)
        if prim.arity > n:
            continue
        for ops in itertools.permutations(range(n), prim.arity):
            got = builtin_gate(name, ops, n).expanded.to_complex()
            np.testing.assert_allclose(got, gate_matrix(name, ops, n), atol=1e-12)


@pytest.mark.parametrize("name", PRIMITIVE_NAMES)
def test_every_builtin_is_exactly_unitary_and_bounded(name):
    prim = GatePrim.get(name)
    assert is_exactly_unitary(prim.doubled_matrix)
    assert validate_gate_for_bound(prim) is None
    for ops in itertools.permutations(range(3), prim.arity):
        g = builtin_gate(name, ops, 3)
        assert is_exactly_unitary(g.expanded)
        assert validate_gate_for_bound(g) is None
        assert max(len(r) for r in g.sparse_rows) <= 2


def test_validation_rejects_out_of_class_entries():
    bad = GatePrim("BAD", 1, ScaledMatrix([[(1, 1, 1, 1), (0, 0, 0, 0)], [(0, 0, 0, 0), (2, 0, 0, 0)]], 1))
    report = validate_gate_for_bound(bad)
    assert report is not None and "row 0" in str(report)


def test_gate_set_sizes():
    assert len(build_gate_set(3, ["H", "T", "Tdg", "CNOT"])) == 15
    assert len(build_gate_set(3, ["X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "CNOT", "CZ"])) == 33
    assert len(build_gate_set(1, ["H", "T"])) == 2


def test_gate_set_order_and_connectivity():
    gs = build_gate_set(3, ["H", "CNOT"], connectivity={(0, 1), (1, 2)})
    assert [g.label for g in gs] == ["H q0", "H q1", "H q2", "CNOT q0,q1", "CNOT q1,q2"]
    with pytest.raises(GateError):
        build_gate_set(2, ["CNOT"], connectivity=set())


def test_gate_errors():
    with pytest.raises(ValueError):
        builtin_gate("FOO", [0], 1)
    with pytest.raises(GateError):
        builtin_gate("CNOT", [0, 0], 2)
    with pytest.raises(GateError):
        builtin_gate("H", [3], 2)
    g = builtin_gate("H", [0], 1)
    with pytest.raises(GateError):
        GateSet(1, (g, builtin_gate("H", [0], 1)))
