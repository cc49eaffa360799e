import numpy as np
import pytest

from engine import clifford
from engine import statevec as sv
from engine.graph_clifford import (
    GraphRegister,
    export_adjacency,
    export_dot,
    graph_state,
    lc_equivalent,
    parse_adjacency,
    to_dense,
)
from exceptions import (
    CliffordIndexError,
    DeadVertexError,
    FrozenRegisterError,
    QubitIndexError,
    QubitLimitError,
    ZeroNormProjectionError,
)
from experiments.verify import random_clifford_run


def chain(n: int) -> GraphRegister:
    g = GraphRegister()
    vs = [g.new_vertex() for _ in range(n)]
    for a, b in zip(vs, vs[1:]):
        g.add_cz(a, b)
    return g


# === ГРУППА КЛИФФОРДОВ ===

def test_group_has_24_distinct_elements():
    assert len(clifford.MATRICES) == clifford.GROUP_ORDER
    assert clifford.IDENTITY == 0
    assert np.allclose(clifford.matrix(0), np.eye(2))


def test_multiplication_table_is_closed_and_has_inverses():
    for a in range(clifford.GROUP_ORDER):
        assert clifford.multiply(a, clifford.inverse(a)) == clifford.IDENTITY
        for b in range(clifford.GROUP_ORDER):
            expected = clifford.lookup(clifford.matrix(a) @ clifford.matrix(b))
            assert clifford.multiply(a, b) == expected


def test_clifford_index_is_validated():
    with pytest.raises(CliffordIndexError):
        clifford.multiply(0, 24)
    with pytest.raises(CliffordIndexError):
        clifford.lookup(sv.uz(0.3))


def test_conjugation_images():
    assert clifford.image(clifford.HADAMARD, "X") == (1, "Z")
    assert clifford.image(clifford.PHASE, "X") == (1, "Y")
    assert clifford.heisenberg(clifford.PAULI_Z, "X") == (-1, "X")


def test_every_element_has_reduction_word():
    for c in range(clifford.GROUP_ORDER):
        assert isinstance(clifford.reduction_word(c), tuple)


# === РЕГИСТР ===

def test_fresh_vertices_are_plus_states():
    g = GraphRegister()
    assert [g.new_vertex() for _ in range(3)] == [0, 1, 2]
    assert sv.states_equal_up_to_global_phase(to_dense(g), sv.init_plus(3))


def test_vertex_ids_are_not_reused():
    g = GraphRegister()
    a = g.new_vertex()
    g.measure_pauli(a, "Z", outcome=0)
    assert g.new_vertex() == 1
    with pytest.raises(DeadVertexError):
        g.add_cz(a, 1)


def test_add_cz_toggles_edge():
    g = chain(2)
    assert g.edges == [(0, 1)]
    assert sv.states_equal_up_to_global_phase(to_dense(g), graph_state(2, [(0, 1)]))
    g.add_cz(0, 1)
    assert g.edges == []
    assert sv.states_equal_up_to_global_phase(to_dense(g), sv.init_plus(2))


def test_add_cz_with_vertex_operators_matches_dense(rng):
    for _ in range(40):
        g = GraphRegister()
        vs = [g.new_vertex() for _ in range(3)]
        g.add_cz(0, 2)
        for v in vs:
            g.apply_local_clifford(v, int(rng.integers(clifford.GROUP_ORDER)))
        before = to_dense(g)
        g.add_cz(0, 1)
        expected = sv.apply_cz(before, 0, 1)
        assert sv.states_equal_up_to_global_phase(to_dense(g), expected)


def test_local_complement_keeps_state():
    g = GraphRegister()
    for _ in range(4):
        g.new_vertex()
    for a, b in [(0, 1), (0, 2), (0, 3)]:
        g.add_cz(a, b)
    before = to_dense(g)
    g.local_complement(0)
    assert set(g.edges) == {(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}
    assert sv.states_equal_up_to_global_phase(to_dense(g), before)


def test_frozen_register_rejects_mutation():
    g = chain(2).freeze()
    with pytest.raises(FrozenRegisterError):
        g.new_vertex()


# === ИЗМЕРЕНИЯ ПАУЛИ ===

def test_z_measurement_cuts_chain():
    g = chain(3)
    label = g.measure_pauli(1, "Z", outcome=1)
    assert label == 1
    assert g.edges == []
    assert g.vertices == [0, 2]
    byproducts = g.pauli_byproducts()
    assert byproducts[0].z and byproducts[2].z


def test_y_measurement_joins_neighbours(rng):
    g = chain(3)
    g.measure_pauli(1, "Y", rng)
    assert g.edges == [(0, 2)]


def test_x_measurement_on_isolated_vertex_is_deterministic():
    g = GraphRegister()
    v = g.new_vertex()
    assert g.measure_pauli(v, "X") == 0
    assert len(g) == 0


@pytest.mark.parametrize("axis", ["X", "Y", "Z"])
@pytest.mark.parametrize("outcome", [0, 1])
def test_forced_measurement_matches_dense(axis, outcome):
    g = chain(4)
    dense = to_dense(g)
    g.measure_pauli(1, axis, outcome=outcome)
    expected = sv.measure_basis(dense, 1, axis, rng=None, outcome=outcome).post_state
    assert sv.states_equal_up_to_global_phase(to_dense(g), expected)


def test_random_operation_sequences_match_dense(rng):
    for _ in range(100):
        assert random_clifford_run(rng, int(rng.integers(2, 13)), 30)


@pytest.mark.parametrize("num_qubits", [10, 12])
def test_wide_registers_match_dense(rng, num_qubits):
    for _ in range(5):
        assert random_clifford_run(rng, num_qubits, 60)


def test_parity_project_on_isolated_pair():
    g = GraphRegister()
    a, b = g.new_vertex(), g.new_vertex()
    g.parity_project(a, b, 1j)
    expected = sv.PureState.from_amplitudes([0, 1, 1j, 0], normalize=True)
    assert sv.states_equal_up_to_global_phase(to_dense(g), expected)


def test_parity_project_without_odd_component():
    g = GraphRegister()
    b, d = g.new_vertex(), g.new_vertex()
    g.apply_local_clifford(b, clifford.HADAMARD)
    g.apply_local_clifford(d, clifford.HADAMARD)
    with pytest.raises(ZeroNormProjectionError):
        g.parity_project(b, d, 1)


# === ЭКСПОРТ И ЭКВИВАЛЕНТНОСТЬ ===

def test_adjacency_and_dot_export():
    g = chain(3)
    g.new_vertex()
    assert export_adjacency(g) == "0 1\n1 2\n"
    dot = export_dot(g)
    assert dot.startswith("graph G {")
    assert "  3;" in dot and "  0 -- 1;" in dot


def test_parse_adjacency():
    assert parse_adjacency("# chain\n1 0\n1 2\n\n0 1\n") == [(0, 1), (1, 2)]
    with pytest.raises(ValueError):
        parse_adjacency("0 0\n")
    with pytest.raises(ValueError):
        parse_adjacency("0 1 2\n")


def test_to_dense_subset_of_components():
    g = chain(2)
    g.new_vertex()
    assert to_dense(g, [2]).num_qubits == 1
    with pytest.raises(QubitIndexError):
        to_dense(g, [0])


def test_lc_equivalence():
    star = graph_state(3, [(0, 1), (0, 2)])
    assert lc_equivalent(star, [(0, 1), (1, 2), (0, 2)])
    assert lc_equivalent(sv.apply_1q(star, 1, sv.H @ sv.S), [(0, 1), (0, 2)])
    assert not lc_equivalent(graph_state(3, [(0, 1)]), [(0, 1), (1, 2)])
    with pytest.raises(QubitLimitError):
        lc_equivalent(sv.init_plus(7), [])
