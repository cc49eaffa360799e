import math

import numpy as np
import pytest

from engine import statevec as sv
from engine.graph_clifford import lc_equivalent
from engine.mbqc import (
    MAX_WIRES,
    CircuitSpec,
    Gate,
    GateKind,
    MeasurementCommand,
    PatternBuilder,
    TargetGraph,
    bridge_pattern,
    cluster_graph,
    compile_circuit,
    compile_rotation,
    enumerate_branches,
    hop_step,
    parse_target_graph,
    prune_cluster,
    rotation_unitary,
    run_pattern,
    run_pruned,
    simulate_circuit,
)
from exceptions import PatternMismatchError, QubitLimitError, UnembeddableTargetError

SQ = 1 / math.sqrt(2)


def random_qubit(rng) -> sv.PureState:
    return sv.PureState.from_amplitudes(rng.normal(size=2) + 1j * rng.normal(size=2), normalize=True)


def small_circuit() -> CircuitSpec:
    return CircuitSpec(width=2, gates=[
        Gate(kind=GateKind.RZ, wires=(0,), angle=0.3),
        Gate(kind=GateKind.H, wires=(1,)),
        Gate(kind=GateKind.CZ, wires=(0, 1)),
        Gate(kind=GateKind.H, wires=(0,)),
    ])


# === ПРЫЖОК ===

@pytest.mark.parametrize("outcome", [0, 1])
def test_hop_applies_hadamard_and_byproduct(outcome):
    psi = sv.single_qubit(0.6, 0.8)
    result = hop_step(psi, 0.0, rng=None, outcome=outcome)
    expected = sv.apply_1q(psi, 0, sv.H)
    if outcome:
        expected = sv.apply_pauli(expected, 0, "X")
    assert result.x_flip == outcome
    assert sv.states_equal_up_to_global_phase(result.post_state, expected)


# === ШАБЛОНЫ ===

@pytest.mark.parametrize("angles", [(0.0, 0.0, 0.0), (0.4, -1.1, 2.5), (math.pi / 2, math.pi / 3, -0.2)])
def test_rotation_is_branch_independent(rng, angles):
    pattern = compile_rotation(*angles)
    psi = random_qubit(rng)
    expected = sv.PureState.from_amplitudes(rotation_unitary(*angles) @ psi.amplitudes)
    branches = enumerate_branches(pattern.blueprint, pattern, [psi])
    assert len(branches) == 2 ** len(pattern.commands)
    for branch in branches:
        assert sv.states_equal_up_to_global_phase(branch.outputs, expected)


def test_corrected_outcome_is_not_counted_twice(rng):
    psi = random_qubit(rng)
    pattern = compile_rotation(0.0, 0.0, 0.0)
    result = run_pattern(pattern.blueprint, pattern, [psi], forced=[1, 0, 1])
    expected = sv.PureState.from_amplitudes(rotation_unitary(0.0, 0.0, 0.0) @ psi.amplitudes)
    assert sv.states_equal_up_to_global_phase(result.outputs, expected)
    # второй прыжок зависит от первого по X, третий - по Z
    assert pattern.commands[1].adapt == [0]
    assert pattern.commands[2].flip == [0]
    assert pattern.output_corrections[3].x == [2]
    assert pattern.output_corrections[3].z == [1]


def test_wire_transport_over_five_vertices(rng):
    builder = PatternBuilder(1)
    builder.hops(0, [0.0] * 4)
    pattern = builder.build()
    assert len(pattern.blueprint.vertices) == 5
    psi = random_qubit(rng)
    branches = enumerate_branches(pattern.blueprint, pattern, [psi])
    assert len(branches) == 16
    for branch in branches:
        assert sv.states_equal_up_to_global_phase(branch.outputs, psi)


def test_bridge_implements_its_circuit(rng):
    pattern, circuit = bridge_pattern()
    for _ in range(3):
        inputs = [random_qubit(rng), random_qubit(rng)]
        expected = simulate_circuit(circuit, inputs)
        for branch in enumerate_branches(pattern.blueprint, pattern, inputs):
            assert sv.states_equal_up_to_global_phase(branch.outputs, expected)


@pytest.mark.parametrize("lazy", [True, False])
def test_compiled_circuit_matches_direct_simulation(rng, lazy):
    circuit = small_circuit()
    blueprint, pattern = compile_circuit(circuit)
    assert len(blueprint.vertices) <= 20
    for _ in range(10):
        inputs = [random_qubit(rng), random_qubit(rng)]
        result = run_pattern(blueprint, pattern, inputs, rng, lazy=lazy)
        assert sv.states_equal_up_to_global_phase(result.outputs, simulate_circuit(circuit, inputs))
        assert len(result.frame.bits) == 2


def test_lazy_and_eager_runs_agree_for_equal_seeds(rng):
    blueprint, pattern = compile_circuit(small_circuit())
    for seed in range(20):
        inputs = [random_qubit(rng), random_qubit(rng)]
        lazy = run_pattern(blueprint, pattern, inputs, np.random.default_rng(seed), lazy=True)
        eager = run_pattern(blueprint, pattern, inputs, np.random.default_rng(seed), lazy=False)
        assert lazy.outcomes == eager.outcomes
        assert lazy.frame == eager.frame
        assert sv.states_equal_up_to_global_phase(lazy.outputs, eager.outputs)


def test_forced_outcomes_are_reproducible(rng):
    pattern = compile_rotation(0.1, 0.2, 0.3)
    psi = random_qubit(rng)
    a = run_pattern(pattern.blueprint, pattern, [psi], forced=[1, 0, 1])
    b = run_pattern(pattern.blueprint, pattern, [psi], forced=[1, 0, 1])
    assert a.outcomes == b.outcomes
    assert np.allclose(a.outputs.amplitudes, b.outputs.amplitudes)


def test_pattern_argument_checks(rng):
    blueprint, pattern = compile_circuit(small_circuit())
    with pytest.raises(PatternMismatchError):
        run_pattern(blueprint, pattern, [random_qubit(rng)], rng)
    with pytest.raises(PatternMismatchError):
        run_pattern(blueprint, pattern, [random_qubit(rng)] * 2, forced=[0])
    with pytest.raises(ValueError):
        run_pattern(blueprint, pattern, [random_qubit(rng)] * 2)


def test_circuit_size_limits():
    with pytest.raises(QubitLimitError):
        compile_circuit(CircuitSpec(width=MAX_WIRES + 1))
    with pytest.raises(QubitLimitError):
        compile_circuit(small_circuit(), max_qubits=4)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate(kind=GateKind.CZ, wires=(0, 0))
    with pytest.raises(ValueError):
        CircuitSpec(width=1, gates=[Gate(kind=GateKind.H, wires=(1,))])


def test_measurement_command_json_form():
    command = MeasurementCommand.model_validate({"vertex": 0, "basis": {"xy": 0.5}})
    assert command.basis == 0.5
    assert command.model_dump()["basis"] == {"xy": 0.5}
    assert MeasurementCommand(vertex=1, basis="Y").model_dump()["basis"] == "Y"


# === ОБРЕЗКА КЛАСТЕРА ===

CORNERS = "# углы решётки 3x3\n0 2\n2 8\n8 6\n"


def test_parse_target_graph():
    target = parse_target_graph("3\n0 1  # ребро\n")
    assert target.vertices == [0, 1, 3]
    assert target.edges == [(0, 1)]
    with pytest.raises(ValueError):
        parse_target_graph("4 4\n")
    with pytest.raises(ValueError):
        parse_target_graph("a b\n")


def test_cluster_numbering():
    grid = cluster_graph(2, 3)
    assert grid.has_edge(0, 1) and grid.has_edge(0, 3)
    assert not grid.has_edge(2, 3)


def test_prune_prelude_for_corner_ring():
    prelude = prune_cluster(3, 3, parse_target_graph(CORNERS))
    assert sorted(v for v, axis in prelude if axis == "Z") == [3, 4]
    assert sorted(v for v, axis in prelude if axis == "Y") == [1, 5, 7]


def test_pruned_state_is_equivalent_to_target(rng):
    register, dense = run_pruned(3, 3, parse_target_graph(CORNERS), rng)
    assert register.vertices == [0, 2, 6, 8]
    assert sorted(register.edges) == [(0, 2), (2, 8), (6, 8)]
    # вершины 0, 2, 6, 8 -> кубиты 0..3
    assert lc_equivalent(dense, [(0, 1), (1, 3), (2, 3)])


def test_unembeddable_targets():
    with pytest.raises(UnembeddableTargetError):
        prune_cluster(2, 2, parse_target_graph("0 9\n"))
    with pytest.raises(UnembeddableTargetError):
        prune_cluster(1, 3, parse_target_graph("0 2\n1\n"))


@pytest.mark.parametrize("text,prelude,edges", [
    ("0 2\n", [(1, "Y")], [(0, 2)]),
    ("0\n2\n", [(1, "Z")], []),
])
def test_prune_line_of_three(rng, text, prelude, edges):
    target = parse_target_graph(text)
    assert prune_cluster(1, 3, target) == prelude
    register, _ = run_pruned(1, 3, target, rng)
    assert register.vertices == [0, 2]
    assert register.edges == edges


def test_whole_cluster_needs_no_prelude(rng):
    target = parse_target_graph("0 1\n0 2\n1 3\n2 3\n")
    assert prune_cluster(2, 2, target) == []
    register, dense = run_pruned(2, 2, target, rng)
    assert register.edges == [(0, 1), (0, 2), (1, 3), (2, 3)]
    assert lc_equivalent(dense, target.edges)


# соседние Y-вершины на пути: вторая измеряется после смены VOP первой
@pytest.mark.parametrize("vertices,edges", [
    ([0, 2, 3], [(2, 3)]),
    ([0, 2, 5], [(0, 5)]),
])
def test_adjacent_path_vertices_follow_local_clifford(rng, vertices, edges):
    target = TargetGraph(vertices=vertices, edges=edges)
    for _ in range(5):
        register, dense = run_pruned(2, 3, target, rng)
        assert register.vertices == vertices
        assert register.edges == edges
        assert lc_equivalent(dense, [(vertices.index(a), vertices.index(b)) for a, b in edges])


@pytest.mark.parametrize("rows,cols", [(2, 3), (3, 3), (2, 4)])
def test_random_targets_are_cut_exactly(rng, rows, cols):
    accepted = 0
    for _ in range(40):
        size = int(rng.integers(2, 5))
        vertices = sorted(int(v) for v in rng.choice(rows * cols, size=size, replace=False))
        pairs = [(a, b) for i, a in enumerate(vertices) for b in vertices[i + 1:]]
        edges = [pair for pair in pairs if rng.random() < 0.5]
        target = TargetGraph(vertices=vertices, edges=edges)
        try:
            register, dense = run_pruned(rows, cols, target, rng)
        except UnembeddableTargetError:
            continue
        accepted += 1
        assert register.vertices == vertices
        assert register.edges == target.edges
        assert lc_equivalent(dense, [(vertices.index(a), vertices.index(b)) for a, b in target.edges])
    assert accepted > 0
