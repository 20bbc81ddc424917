import pytest

from oracles import SINGLE, bfs_words, gate_matrix, min_type_count
from satsynth.gates import GatePrim, build_gate_set
from satsynth.ring import ScaledMatrix, phase_factor
from satsynth.search import SoundnessError, find_min_circuit, minimize_type_count
from satsynth.solve import DecodeError, SolverConfig
from satsynth.targets import MatrixTarget, builtin_target, ghz_mapping
from satsynth.verify import check_implements, simulate_exact


def _mats(gs):
    return [gate_matrix(g.name, g.operands, gs.n) for g in gs]


@pytest.fixture(scope="module")
def one_qubit():
    gs = build_gate_set(1, ["H", "T", "Tdg"])
    return gs, bfs_words([SINGLE[g.name] for g in gs], 5)


def test_minimal_depth_matches_bfs(solver, one_qubit):
    gs, best = one_qubit
    short = [w for w in best.values() if len(w) <= 4]
    assert len(short) == 45
    for word in short:
        target = MatrixTarget(simulate_exact(list(word), gs))
        res = find_min_circuit(target, gs, 4, solver)
        assert res.status == "found" and res.minimal_d == len(word), word
        assert res.optimal and res.unsat_below == list(range(1, len(word)))
        assert check_implements(res.circuit, gs, target).passed


def test_depth_five_targets_are_unsat_up_to_four(solver, one_qubit):
    gs, best = one_qubit
    five = [w for w in best.values() if len(w) == 5][:6]
    for word in five:
        res = find_min_circuit(MatrixTarget(simulate_exact(list(word), gs)), gs, 4, solver)
        assert res.status == "unsat" and res.circuit is None
        assert [r.verdict for r in res.records] and all(r.verdict in ("UNSAT", "INFEASIBLE") for r in res.records)


def test_S_is_T_twice(solver):
    gs = build_gate_set(1, ["H", "T"])
    res = find_min_circuit(MatrixTarget(GatePrim.get("S").doubled_matrix), gs, 3, solver)
    assert res.circuit.steps == (1, 1) and res.unsat_below == [1] and res.phase == 0


def test_identity_needs_no_gates(solver):
    gs = build_gate_set(2, ["H", "CNOT"])
    res = find_min_circuit(MatrixTarget(ScaledMatrix.identity(4)), gs, 3, solver)
    assert res.status == "found" and res.minimal_d == 0 and res.circuit.steps == ()


def test_swap_takes_three_cnots(solver):
    gs = build_gate_set(2, ["H", "T", "Tdg", "CNOT"])
    res = find_min_circuit(builtin_target("swap"), gs, 4, solver)
    assert res.minimal_d == 3 and res.optimal and res.unsat_below == [1, 2]
    assert all(gs[j].name == "CNOT" for j in res.circuit.steps)


def test_ghz3_state_preparation(solver):
    gs = build_gate_set(3, ["H", "T", "Tdg", "CNOT"])
    res = find_min_circuit(ghz_mapping(3), gs, 4, solver)
    assert res.minimal_d == 3 and res.optimal
    assert check_implements(res.circuit, gs, ghz_mapping(3)).passed


def test_phase_multiples_allow_global_phase(solver):
    gs = build_gate_set(1, ["H", "T"])
    # T up to a global phase of e^{i pi/4}
    t = GatePrim.get("T").doubled_matrix
    ph = phase_factor(1)
    rotated = MatrixTarget(ScaledMatrix(t.times(ph.value).data, t.scale + ph.scale))
    assert find_min_circuit(rotated, gs, 2, solver).status == "unsat"
    res = find_min_circuit(rotated, gs, 2, solver, phase_multiples=range(8))
    assert res.minimal_d == 1 and res.phase == 7


def test_d_min_above_one_is_not_optimal(solver):
    gs = build_gate_set(1, ["H", "T"])
    res = find_min_circuit(MatrixTarget(GatePrim.get("S").doubled_matrix), gs, 3, solver, d_min=2)
    assert res.minimal_d == 2 and not res.optimal


def test_infeasible_target_never_runs_solver(tmp_path):
    fake = tmp_path / "never.sh"
    fake.write_text("#!/bin/sh\necho called > " + str(tmp_path / "called") + "\nexit 20\n")
    fake.chmod(0o755)
    gs = build_gate_set(1, ["H", "T"])
    deep = MatrixTarget(simulate_exact([0, 1] * 5 + [0], gs))
    res = find_min_circuit(deep, gs, 2, SolverConfig(str(fake)))
    assert res.status == "infeasible"
    assert not (tmp_path / "called").exists()


def test_timeout_voids_optimality(tmp_path):
    fake = tmp_path / "slow.sh"
    fake.write_text("#!/bin/sh\nsleep 30\n")
    fake.chmod(0o755)
    gs = build_gate_set(1, ["H", "T"])
    res = find_min_circuit(MatrixTarget(GatePrim.get("S").doubled_matrix), gs, 2, SolverConfig(str(fake), timeout=0.2))
    assert res.status == "error" and res.circuit is None
    assert [r.verdict for r in res.records] == ["TIMEOUT", "TIMEOUT"]


def test_solver_error_stops_the_search(tmp_path):
    fake = tmp_path / "bad.sh"
    fake.write_text("#!/bin/sh\nexit 1\n")
    fake.chmod(0o755)
    gs = build_gate_set(1, ["H", "T"])
    res = find_min_circuit(MatrixTarget(GatePrim.get("S").doubled_matrix), gs, 3, SolverConfig(str(fake)))
    assert res.status == "error" and len(res.records) == 1


def test_invalid_model_is_rejected(tmp_path):
    # claims SAT with every variable true; exactly-one makes this invalid
    fake = tmp_path / "liar.sh"
    fake.write_text(
        "#!/bin/sh\n"
        "n=$(grep '^p cnf' \"$1\" | cut -d' ' -f3)\n"
        "echo 's SATISFIABLE'; printf 'v'; i=1; while [ $i -le $n ]; do printf ' %d' $i; i=$((i+1)); done; echo ' 0'\n"
        "exit 10\n"
    )
    fake.chmod(0o755)
    gs = build_gate_set(1, ["H", "T"])
    with pytest.raises((SoundnessError, DecodeError)):
        find_min_circuit(MatrixTarget(GatePrim.get("S").doubled_matrix), gs, 1, SolverConfig(str(fake)))


def test_parallel_workers_agree(solver, tmp_path):
    gs = build_gate_set(2, ["H", "T", "Tdg", "CNOT"])
    a = find_min_circuit(builtin_target("swap"), gs, 4, solver)
    b = find_min_circuit(builtin_target("swap"), gs, 4, solver, workers=3, artifacts=tmp_path)
    assert (a.minimal_d, a.optimal) == (b.minimal_d, b.optimal) == (3, True)
    assert check_implements(b.circuit, gs, builtin_target("swap")).passed
    assert (tmp_path / "instance_d1.cnf").exists()


@pytest.mark.parametrize("name, count", [("S", 2), ("H", 0), ("Z", 4)])
def test_type_count_examples(solver, name, count):
    gs = build_gate_set(1, ["H", "T", "Tdg"])
    idx = gs.indices_of(["T", "Tdg"])
    target = MatrixTarget(GatePrim.get(name).doubled_matrix)
    res = minimize_type_count(target, gs, idx, solver, d_max=4)
    assert res.status == "found" and res.min_count == count and res.proven
    assert check_implements(res.circuit, gs, target).passed
    assert res.min_count == min_type_count(_mats(gs), SINGLE[name], set(idx), 4)


def test_type_count_for_X_matches_oracle(solver):
    gs = build_gate_set(1, ["H", "T", "Tdg"])
    idx = gs.indices_of(["T", "Tdg"])
    res = minimize_type_count(MatrixTarget(GatePrim.get("X").doubled_matrix), gs, idx, solver, d_max=6)
    assert res.min_count == min_type_count(_mats(gs), SINGLE["X"], set(idx), 6) == 4


def test_type_count_argument_errors(solver):
    gs = build_gate_set(1, ["H", "T"])
    target = MatrixTarget(GatePrim.get("S").doubled_matrix)
    with pytest.raises(ValueError):
        minimize_type_count(target, gs, [], solver, d_max=2)
    with pytest.raises(ValueError):
        minimize_type_count(target, gs, [1], solver)
    with pytest.raises(ValueError):
        find_min_circuit(target, gs, 0, solver)
