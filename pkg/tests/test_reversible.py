import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rev_apply, rev_min_len, rev_placements
from satsynth.cnf import toy_solve
from satsynth.gates import GatePrim, build_gate_set
from satsynth.reversible import (
    TruthTableError,
    TruthTableSpec,
    check_truth_table,
    encode_reversible,
    format_truth_table,
    parse_truth_table,
    simulate,
    synth_reversible_min,
    truth_table_from_permutation,
    truth_table_of,
)
from satsynth.targets import MatrixTarget, builtin_target

NAMES = ["X", "CNOT", "TOFFOLI"]

SWAP = "00 -> 00\n01 -> 10\n10 -> 01\n11 -> 11\n"
TOFFOLI = "".join(f"{a}{b}{c} -> {a}{b}{c ^ (a & b)}\n" for a in (0, 1) for b in (0, 1) for c in (0, 1))


def _bits(v, n):
    return tuple((v >> (n - 1 - q)) & 1 for q in range(n))


# ----------------------------------------------------------------- parsing


def test_parse_and_format_round_trip():
    spec = parse_truth_table("# swap\n00 -> 00\n01->10  # comment\n\n10 -> 0-\n")
    assert spec.n == 2
    assert spec.rows == {(0, 0): (0, 0), (0, 1): (1, 0), (1, 0): (0, None)}
    assert format_truth_table(spec) == "00 -> 00\n01 -> 10\n10 -> 0-\n"
    assert parse_truth_table(format_truth_table(spec)) == spec


@pytest.mark.parametrize("text", [
    "",
    "# only a comment\n",
    "00 01\n",
    "0a -> 00\n",
    "00 -> 0\n",
    "00 -> 01\n1 -> 1\n",
    "0- -> 00\n",
    "00 -> 01\n00 -> 10\n",
])
def test_parse_errors(text):
    with pytest.raises(TruthTableError):
        parse_truth_table(text)


def test_repeated_identical_row_is_fine():
    assert parse_truth_table("01 -> 10\n01 -> 10\n").rows == {(0, 1): (1, 0)}


def test_non_injective_table_warns():
    with pytest.warns(UserWarning):
        parse_truth_table("00 -> 11\n01 -> 11\n")


def test_from_permutation_target():
    spec = truth_table_from_permutation(builtin_target("swap"))
    assert spec == parse_truth_table(SWAP)
    with pytest.raises(TruthTableError):
        truth_table_from_permutation(MatrixTarget(GatePrim.get("H").doubled_matrix))
    # the measured-AND target keeps only permutation columns
    assert truth_table_from_permutation(builtin_target("and")).n == 3


# -------------------------------------------------------------- simulation


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(0, 10_000), max_size=10))))
def test_simulation_matches_oracle(args):
    n, raw = args
    gs = build_gate_set(n, [g for g in NAMES if {"X": 1, "CNOT": 2, "TOFFOLI": 3}[g] <= n])
    word = [r % len(gs) for r in raw]
    gates = [(gs[j].name, gs[j].operands) for j in word]
    inputs = [_bits(v, n) for v in range(1 << n)]
    got = simulate(word, gs, inputs)
    assert got == [_bits(rev_apply(gates, n, v), n) for v in range(1 << n)]
    assert sorted(got) == inputs  # reversible circuits permute the basis
    assert check_truth_table(word, gs, truth_table_of(word, gs))


def test_simulation_rejects_quantum_gates():
    gs = build_gate_set(1, ["H"])
    with pytest.raises(TruthTableError):
        simulate([0], gs, [(0,)])


# --------------------------------------------------------------- synthesis


def test_identity_table():
    gs = build_gate_set(1, ["X"])
    spec = parse_truth_table("0 -> 0\n1 -> 1\n")
    res = synth_reversible_min(spec, gs, 3, None)
    assert res.minimal_d == 0 and res.circuit.steps == ()


def test_identity_unreachable_with_one_not(solver):
    gs = build_gate_set(1, ["X"])
    spec = parse_truth_table("0 -> 0\n1 -> 1\n")
    f, _ = encode_reversible(spec, gs, 1)
    assert toy_solve(f) is None
    assert synth_reversible_min(spec, gs, 3, solver, d_min=1).minimal_d == 0
    res = synth_reversible_min(spec, gs, 3, solver, d_min=2)
    assert res.minimal_d == 2 and not res.optimal


def test_swap_needs_three(solver):
    gs = build_gate_set(2, NAMES[:2])
    res = synth_reversible_min(parse_truth_table(SWAP), gs, 4, solver)
    assert res.minimal_d == 3 and res.optimal and res.unsat_below == [1, 2]


def test_not_on_second_wire(solver):
    gs = build_gate_set(2, NAMES[:2])
    res = synth_reversible_min(parse_truth_table("00 -> 01\n01 -> 00\n10 -> 11\n11 -> 10\n"), gs, 3, solver)
    assert res.minimal_d == 1 and gs[res.circuit.steps[0]].label == "X q1"


def test_toffoli_in_one_step_with_toffoli_gates(solver):
    gs = build_gate_set(3, NAMES)
    res = synth_reversible_min(parse_truth_table(TOFFOLI), gs, 2, solver)
    assert res.minimal_d == 1 and gs[res.circuit.steps[0]].label == "TOFFOLI q0,q1,q2"


def test_toffoli_unreachable_without_toffoli(solver):
    gs = build_gate_set(3, NAMES[:2])
    res = synth_reversible_min(parse_truth_table(TOFFOLI), gs, 6, solver)
    assert res.status == "unsat" and res.unsat_below == [1, 2, 3, 4, 5, 6]


def _random_spec(rng, n, dont_care):
    perm = list(range(1 << n))
    rng.shuffle(perm)
    rows = {}
    for v in range(1 << n):
        if rng.random() < 0.25 and v:
            continue
        out = list(_bits(perm[v], n))
        if dont_care:
            out = [None if rng.random() < 0.3 else b for b in out]
        rows[_bits(v, n)] = tuple(out)
    return TruthTableSpec(n, rows)


@pytest.mark.parametrize("seed", range(24))
def test_random_tables_match_bfs(solver, seed):
    rng = random.Random(seed)
    n = rng.choice([2, 3])
    names = NAMES if n == 3 else NAMES[:2]
    gs = build_gate_set(n, names)
    spec = _random_spec(rng, n, dont_care=seed % 2 == 1)
    rows = {int("".join(map(str, k)), 2): v for k, v in spec.rows.items()}
    want = rev_min_len(n, rev_placements(n, names), rows, 4)
    res = synth_reversible_min(spec, gs, 4, solver)
    if want is None:
        assert res.status == "unsat"
    else:
        assert res.minimal_d == want and check_truth_table(res.circuit, gs, spec)


@pytest.mark.parametrize("seed", range(6))
def test_dont_care_tightening_never_lowers_depth(solver, seed):
    rng = random.Random(50 + seed)
    n = 2
    gs = build_gate_set(n, NAMES[:2])
    loose = _random_spec(rng, n, dont_care=True)
    perm = list(range(4))
    while True:
        rng.shuffle(perm)
        if all(all(o is None or o == b for o, b in zip(out, _bits(perm[int("".join(map(str, k)), 2)], n)))
               for k, out in loose.rows.items()):
            break
    tight = TruthTableSpec(n, {k: _bits(perm[int("".join(map(str, k)), 2)], n) for k in loose.rows})
    a = synth_reversible_min(loose, gs, 5, solver)
    b = synth_reversible_min(tight, gs, 5, solver)
    assert a.minimal_d is not None and b.minimal_d is not None
    assert a.minimal_d <= b.minimal_d


def test_wire_count_mismatch():
    with pytest.raises(TruthTableError):
        encode_reversible(parse_truth_table(SWAP), build_gate_set(3, ["X"]), 1)
    with pytest.raises(TruthTableError):
        encode_reversible(parse_truth_table(SWAP), build_gate_set(2, ["H"]), 1)
