import numpy as np
import pytest

from engine import statevec as sv
from engine.graph_clifford import GraphRegister, lc_equivalent, to_dense
from engine.growth import (
    LinkModel,
    broker_bell,
    broker_to_client_edge,
    branch_step,
    edge_time,
    grow_branch,
    grow_brokered_graph,
    new_branch,
    new_broker_node,
    simulate_branch_growth,
)
from exceptions import BranchTipError, BrokerStateError


# === ВЕТВИ ===

def test_certain_success_adds_two_vertices(rng):
    register = GraphRegister()
    branch = new_branch(register, 3)
    outcome = branch_step(register, branch, LinkModel(p_success=1.0), rng)
    assert outcome.success and outcome.delta == 2
    assert outcome.phase in (1j, -1j)
    assert len(branch) == 5
    assert register.vertices == sorted(branch.vertices)


def test_certain_failure_removes_tip(rng):
    register = GraphRegister()
    branch = new_branch(register, 3)
    outcome = branch_step(register, branch, LinkModel(p_success=0.0), rng)
    assert not outcome.success and outcome.delta == -1
    assert branch.vertices == [0, 1]
    assert register.edges == [(0, 1)]


def test_exhausted_branch_has_no_tip(rng):
    register = GraphRegister()
    branch = new_branch(register, 1)
    stats = grow_branch(register, branch, LinkModel(p_success=0.0), steps=5, rng=rng)
    assert stats.exhausted and stats.attempts == 1
    with pytest.raises(BranchTipError):
        branch.tip


def test_physical_growth_keeps_register_in_step_with_branch(rng):
    register = GraphRegister()
    branch = new_branch(register, 4)
    stats = grow_branch(register, branch, LinkModel(p_success=0.5, attempt_time=2.0), steps=20, rng=rng)
    assert stats.final_length == len(branch)
    assert stats.qubits_in_state[0] == 4 and stats.qubits_in_state[-1] == len(branch)
    assert stats.model_time == pytest.approx(2.0 * stats.attempts)
    assert register.vertices == sorted(branch.vertices)


def test_ensemble_extremes(rng):
    always = simulate_branch_growth(1.0, 10, 5, rng)
    assert always.mean_drift == pytest.approx(2.0)
    never = simulate_branch_growth(0.0, 10, 5, rng, initial_length=20)
    assert never.mean_drift == pytest.approx(-1.0)
    short = simulate_branch_growth(0.0, 10, 1, rng, initial_length=3)
    stats = short.trials[0]
    assert stats.exhausted and stats.attempts == 3 and stats.final_length == 0


@pytest.mark.parametrize("p", [0.2, 1 / 3, 0.5, 0.9])
def test_mean_drift_is_three_p_minus_one(rng, p):
    ensemble = simulate_branch_growth(p, 50, 2000, rng)
    assert abs(ensemble.mean_drift - ensemble.expected_drift) <= 4 * ensemble.drift_stderr


def test_long_run_drift_at_half(rng):
    ensemble = simulate_branch_growth(0.5, 10_000, 100, rng)
    assert ensemble.expected_drift == pytest.approx(0.5)
    assert abs(ensemble.mean_drift - 0.5) <= 4 * ensemble.drift_stderr
    assert not any(stats.exhausted for stats in ensemble.trials)


def test_trace_is_kept_on_request(rng):
    ensemble = simulate_branch_growth(0.5, 8, 2, rng, initial_length=10, keep_trace=True)
    for stats in ensemble.trials:
        assert len(stats.qubits_in_state) == stats.attempts + 1
        assert stats.qubits_in_state[0] == 10


def test_trace_rows_describe_a_chain(rng):
    ensemble = simulate_branch_growth(0.5, 12, 1, rng, initial_length=6, attempt_time=2e-9, keep_trace=True)
    rows = ensemble.trials[0].trace
    assert len(rows) == ensemble.trials[0].attempts + 1
    assert list(rows[0].model_dump()) == ["step", "attempts", "qubits", "edges", "model_time_ns"]
    for row in rows:
        assert row.step == row.attempts
        assert row.qubits - row.edges == 1 or row.qubits == 0
        assert row.model_time_ns == pytest.approx(row.attempts * 2.0)


def test_physical_trace_counts_register_edges(rng):
    register = GraphRegister()
    branch = new_branch(register, 4)
    stats = grow_branch(register, branch, LinkModel(p_success=0.5, attempt_time=1e-9), steps=10, rng=rng)
    assert stats.trace[0].qubits == 4 and stats.trace[0].edges == 3
    last = stats.trace[-1]
    assert last.qubits == len(register) and last.edges == len(register.edges)
    assert last.model_time_ns == pytest.approx(stats.attempts)


def test_ensemble_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        simulate_branch_growth(1.5, 10, 1, rng)
    with pytest.raises(ValueError):
        simulate_branch_growth(0.5, 0, 1, rng)


def test_ensemble_is_seed_reproducible():
    a = simulate_branch_growth(0.4, 30, 10, np.random.default_rng(5))
    b = simulate_branch_growth(0.4, 30, 10, np.random.default_rng(5))
    assert a.mean_drift == b.mean_drift


# === БРОКЕРЫ ===

def test_failed_attempts_leave_clients_untouched(rng):
    register = GraphRegister()
    nodes = [new_broker_node(register, i) for i in range(2)]
    grow_brokered_graph(register, nodes, [(0, 1)], LinkModel(p_success=1.0), rng)
    clients = [n.client for n in nodes]
    before = to_dense(register, clients)
    edges_before = register.edges

    result = broker_bell(nodes[0], nodes[1], LinkModel(p_success=0.0), register, rng, max_attempts=7)
    assert result is None
    assert register.edges == edges_before
    assert sv.states_equal_up_to_global_phase(to_dense(register, clients), before)
    for node in nodes:
        assert not register.neighbors(node.broker)


def test_brokered_chain_has_exact_client_edges(rng):
    register = GraphRegister()
    nodes = [new_broker_node(register, i) for i in range(3)]
    stats = grow_brokered_graph(register, nodes, [(0, 1), (1, 2)], LinkModel(p_success=0.3), rng)
    clients = [n.client for n in nodes]
    assert register.edges == [(nodes[0].client, nodes[1].client), (nodes[1].client, nodes[2].client)]
    assert stats.edges_created == 2 and stats.attempts >= 2
    assert lc_equivalent(to_dense(register, clients), [(0, 1), (1, 2)])


def test_client_edge_toggles_existing_edge(rng):
    register = GraphRegister()
    a, b = new_broker_node(register, 0), new_broker_node(register, 1)
    link = LinkModel(p_success=1.0)
    for _ in range(2):
        broker_bell(a, b, link, register, rng)
        record = broker_to_client_edge(a, b, register, rng)
        assert record.client_edge == (a.client, b.client)
    assert register.edges == []


def test_broker_must_be_fresh(rng):
    register = GraphRegister()
    a, b = new_broker_node(register, 0), new_broker_node(register, 1)
    register.add_cz(a.broker, a.client)
    with pytest.raises(BrokerStateError):
        broker_bell(a, b, LinkModel(p_success=1.0), register, rng)


def test_attempts_per_edge_are_geometric(rng):
    p, runs = 0.25, 400
    counts = []
    for _ in range(runs):
        register = GraphRegister()
        a, b = new_broker_node(register, 0), new_broker_node(register, 1)
        counts.append(broker_bell(a, b, LinkModel(p_success=p), register, rng))
    sigma = np.sqrt(1 - p) / p
    assert abs(np.mean(counts) - 1 / p) <= 4 * sigma / np.sqrt(runs)


def test_edge_time():
    assert edge_time(LinkModel(p_success=0.5 * 0.01 ** 2, attempt_time=200e-9)) == pytest.approx(4e-3)
    assert edge_time(LinkModel(p_success=0.5 * 0.5 ** 2, attempt_time=1e-9)) == pytest.approx(8e-9)
    with pytest.raises(ValueError):
        edge_time(LinkModel(p_success=0.0))


def test_broker_farm_survives_many_failures(rng):
    register = GraphRegister()
    nodes = [new_broker_node(register, i) for i in range(4)]
    clients = [n.client for n in nodes]
    ring = [(0, 1), (1, 2), (2, 3), (3, 0)]
    never, always = LinkModel(p_success=0.0), LinkModel(p_success=1.0)
    built = []
    failures = 0
    for i, j in ring:
        before = to_dense(register, clients)
        edges_before = register.edges
        assert broker_bell(nodes[i], nodes[j], never, register, rng, max_attempts=250) is None
        failures += 250
        assert register.edges == edges_before
        assert np.allclose(to_dense(register, clients).amplitudes, before.amplitudes, atol=1e-12)

        broker_bell(nodes[i], nodes[j], always, register, rng)
        broker_to_client_edge(nodes[i], nodes[j], register, rng)
        built.append((i, j))
        assert lc_equivalent(to_dense(register, clients), built)
    assert failures >= 1000


def test_broker_trace_has_a_row_per_edge(rng):
    register = GraphRegister()
    nodes = [new_broker_node(register, i) for i in range(3)]
    stats = grow_brokered_graph(register, nodes, [(0, 1), (1, 2)], LinkModel(p_success=0.5), rng)
    assert [row.step for row in stats.trace] == [0, 1, 2]
    assert [row.edges for row in stats.trace] == [0, 1, 2]
    assert stats.trace[-1].attempts == stats.attempts
    assert all(row.qubits == 6 for row in stats.trace)
