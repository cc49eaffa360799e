"""
Эксперимент verify: сверка быстрых бэкендов с плотными эталонами.

Наборы проверок:
    graph   - графовый регистр против вектора состояния
    pattern - шаблоны MBQC против прямого моделирования схем
    growth  - дрейф ветви, изоляция клиентов брокерами, геометрия попыток
    erasure - геральды стирания пути против точного перебора

Каждый набор получает собственный генератор, выведенный из главного сида и
номера набора, поэтому подмножество наборов воспроизводит те же проверки.
"""
import logging
import math
from typing import Callable

import numpy as np
from pydantic import BaseModel

from dependencies import trial_rng
from engine import clifford
from engine import statevec as sv
from engine.erasure import ApparatusParams, Scheme, heralded_performance, ideal_heralded_state, parity_project
from engine.graph_clifford import GraphRegister, graph_state, lc_equivalent, to_dense
from engine.growth import (
    LinkModel,
    broker_bell,
    broker_to_client_edge,
    edge_time,
    grow_brokered_graph,
    new_branch,
    new_broker_node,
    simulate_branch_growth,
)
from engine.mbqc import (
    CircuitSpec,
    Gate,
    GateKind,
    bridge_pattern,
    compile_circuit,
    compile_rotation,
    enumerate_branches,
    rotation_unitary,
    run_pattern,
    simulate_circuit,
)
from experiments.outcome import ExperimentOutcome, within_band
from experiments.run_pattern import random_qubit
from schemas import Scenario, VERIFY_SUITES

logger = logging.getLogger("verify")

# число случайных случаев на проверку, если trials не задан явно
DEFAULT_CASES = 20


class CheckResult(BaseModel):
    suite: str
    name: str
    passed: bool
    detail: str = ""


class _Recorder:
    def __init__(self, suite: str):
        self.suite = suite
        self.results: list[CheckResult] = []

    def check(self, name: str, fn: Callable[[], bool | tuple[bool, str]]) -> None:
        try:
            outcome = fn()
            passed, detail = outcome if isinstance(outcome, tuple) else (outcome, "")
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        if not passed:
            logger.error(f"Проверка {self.suite}/{name} не прошла: {detail}")
        self.results.append(CheckResult(suite=self.suite, name=name, passed=bool(passed), detail=detail))


def _same(a: sv.PureState, b: sv.PureState) -> bool:
    return sv.states_equal_up_to_global_phase(a, b)


# ==========================================
# ГРАФОВЫЙ РЕГИСТР
# ==========================================

def random_clifford_run(rng: np.random.Generator, num_qubits: int, steps: int) -> bool:
    """Случайная последовательность клиффордов, CZ и измерений Паули на обоих бэкендах."""
    register = GraphRegister()
    live = [register.new_vertex() for _ in range(num_qubits)]
    dense = sv.init_plus(num_qubits)
    for _ in range(steps):
        op = int(rng.integers(3))
        if op == 0:
            v, c = live[int(rng.integers(len(live)))], int(rng.integers(clifford.GROUP_ORDER))
            register.apply_local_clifford(v, c)
            dense = sv.apply_1q(dense, live.index(v), clifford.matrix(c))
        elif op == 1 and len(live) > 1:
            i, j = rng.choice(len(live), size=2, replace=False)
            register.add_cz(live[int(i)], live[int(j)])
            dense = sv.apply_cz(dense, int(i), int(j))
        elif op == 2 and len(live) > 1:
            v = live[int(rng.integers(len(live)))]
            axis = clifford.AXES[int(rng.integers(3))]
            label = register.measure_pauli(v, axis, rng)
            dense = sv.measure_basis(dense, live.index(v), axis, rng, outcome=label).post_state
            live.remove(v)
    return _same(to_dense(register), dense)


def _chain(length: int) -> GraphRegister:
    register = GraphRegister()
    new_branch(register, length)
    return register


def graph_suite(rng: np.random.Generator, cases: int) -> list[CheckResult]:
    rec = _Recorder("graph")

    def sequences():
        failed = [k for k in range(cases)
                  if not random_clifford_run(rng, int(rng.integers(2, 13)), 30)]
        return not failed, f"{len(failed)} of {cases} sequences diverged" if failed else ""

    def z_cut():
        register = _chain(3)
        register.measure_pauli(1, "Z", rng)
        return register.edges == [] and lc_equivalent(to_dense(register), [])

    def y_join():
        register = _chain(3)
        register.measure_pauli(1, "Y", rng)
        return register.edges == [(0, 2)] and lc_equivalent(to_dense(register), [(0, 1)])

    def local_complement_keeps_state():
        register = GraphRegister()
        vertices = [register.new_vertex() for _ in range(5)]
        for a, b in [(0, 1), (1, 2), (1, 3), (3, 4), (2, 4)]:
            register.add_cz(vertices[a], vertices[b])
        for v in vertices:
            register.apply_local_clifford(v, int(rng.integers(clifford.GROUP_ORDER)))
        before = to_dense(register)
        register.local_complement(vertices[1])
        return _same(before, to_dense(register))

    rec.check("random_sequences", sequences)
    rec.check("z_measurement_cuts_chain", z_cut)
    rec.check("y_measurement_joins_chain", y_join)
    rec.check("local_complement_keeps_state", local_complement_keeps_state)
    return rec.results


# ==========================================
# ШАБЛОНЫ MBQC
# ==========================================

def pattern_suite(rng: np.random.Generator, cases: int) -> list[CheckResult]:
    rec = _Recorder("pattern")

    def rotations():
        for _ in range(cases):
            angles = rng.uniform(-math.pi, math.pi, size=3)
            pattern = compile_rotation(*angles)
            psi = random_qubit(rng)
            expected = sv.PureState.from_amplitudes(rotation_unitary(*angles) @ psi.amplitudes)
            for result in enumerate_branches(pattern.blueprint, pattern, [psi]):
                if not _same(result.outputs, expected):
                    return False, f"angles {angles.tolist()} outcomes {result.outcomes}"
        return True

    def bridge():
        pattern, circuit = bridge_pattern()
        inputs = [random_qubit(rng), random_qubit(rng)]
        expected = simulate_circuit(circuit, inputs)
        return all(_same(r.outputs, expected) for r in enumerate_branches(pattern.blueprint, pattern, inputs))

    def compiled_circuit():
        circuit = CircuitSpec(width=2, gates=[
            Gate(kind=GateKind.RZ, wires=(0,), angle=float(rng.uniform(-math.pi, math.pi))),
            Gate(kind=GateKind.H, wires=(1,)),
            Gate(kind=GateKind.CZ, wires=(0, 1)),
        ])
        blueprint, pattern = compile_circuit(circuit)
        for _ in range(cases):
            inputs = [random_qubit(rng), random_qubit(rng)]
            result = run_pattern(blueprint, pattern, inputs, rng)
            if not _same(result.outputs, simulate_circuit(circuit, inputs)):
                return False, f"outcomes {result.outcomes}"
        return True

    rec.check("rotation_branches", rotations)
    rec.check("bridge_branches", bridge)
    rec.check("compiled_circuit", compiled_circuit)
    return rec.results


# ==========================================
# РОСТ
# ==========================================

def growth_suite(rng: np.random.Generator, cases: int) -> list[CheckResult]:
    rec = _Recorder("growth")

    def drift(p: float):
        def run():
            ensemble = simulate_branch_growth(p, 2000, max(cases, 2), rng)
            ok = within_band(ensemble.mean_drift, 3 * p - 1, ensemble.drift_stderr)
            return ok, f"drift {ensemble.mean_drift:.4f} +- {ensemble.drift_stderr:.4f}"
        return run

    def insulation():
        register = GraphRegister()
        nodes = [new_broker_node(register, i) for i in range(3)]
        grow_brokered_graph(register, nodes, [(0, 1)], LinkModel(p_success=1.0), rng)
        clients = [node.client for node in nodes]
        before = to_dense(register, clients).amplitudes
        attempts = broker_bell(nodes[1], nodes[2], LinkModel(p_success=0.2), register, rng)
        after = to_dense(register, clients).amplitudes
        if np.max(np.abs(before - after)) > sv.EXACT_TOL:
            return False, f"client state moved during {attempts - 1} failed attempts"
        broker_to_client_edge(nodes[1], nodes[2], register, rng)
        return lc_equivalent(to_dense(register, clients), [(0, 1), (1, 2)])

    def geometric_attempts():
        link = LinkModel(p_success=0.25)
        runs = 100 * max(cases, 2)
        used = []
        for _ in range(runs):
            register = GraphRegister()
            a, b = new_broker_node(register, 0), new_broker_node(register, 1)
            used.append(broker_bell(a, b, link, register, rng))
        mean = float(np.mean(used))
        stderr = float(np.std(used, ddof=1) / math.sqrt(runs))
        return within_band(mean, 4.0, stderr), f"mean attempts {mean:.3f} +- {stderr:.3f}"

    def nv_edge_time():
        return math.isclose(edge_time(LinkModel(p_success=5e-5, attempt_time=200e-9)), 4e-3, rel_tol=1e-9)

    for p in (0.2, 0.5):
        rec.check(f"branch_drift_p{p}", drift(p))
    rec.check("broker_insulation", insulation)
    rec.check("broker_attempts_geometric", geometric_attempts)
    rec.check("nv_edge_time", nv_edge_time)
    return rec.results


# ==========================================
# СТИРАНИЕ ПУТИ
# ==========================================

def erasure_suite(rng: np.random.Generator, cases: int) -> list[CheckResult]:
    rec = _Recorder("erasure")
    plus = sv.init_plus(2)
    left_state = sv.PureState.from_amplitudes([0, 1, 1j, 0], normalize=True)
    right_state = sv.PureState.from_amplitudes([0, 1j, 1, 0], normalize=True)

    def ideal_performance():
        perf = heralded_performance(ApparatusParams.ideal())
        return math.isclose(perf.success_prob, 0.5, abs_tol=1e-12) and math.isclose(perf.fidelity, 1.0, abs_tol=1e-12)

    def heralded_states():
        return (_same(ideal_heralded_state(plus, [(1, 0)]), left_state)
                and _same(ideal_heralded_state(plus, [(0, 1)]), right_state))

    def which_detector_matters():
        mixed = sv.mix([(0.5, sv.to_density(left_state)), (0.5, sv.to_density(right_state))])
        return sv.is_ppt(mixed, [0]) and not sv.is_ppt(sv.to_density(left_state), [0])

    def three_qubit_extension():
        state = sv.PureState.from_amplitudes([0, 0, 1, 1, 1j, 1j, 0, 0], normalize=True)
        left, _ = parity_project(state, 1, 0, 1j)
        right, _ = parity_project(state, 1, 0, -1j)
        ghz_plus = sv.PureState.from_amplitudes([0, 0, 1, 0, 0, 1, 0, 0], normalize=True)
        ghz_minus = sv.PureState.from_amplitudes([0, 0, 1, 0, 0, -1, 0, 0], normalize=True)
        return _same(left, ghz_plus) and _same(right, ghz_minus)

    def probabilities_sum_to_one():
        params = ApparatusParams(eta=0.3, dark_prob=0.01, scheme=Scheme.TWO_PHOTON)
        total = sum(heralded_performance(params).click_table.values())
        return abs(total - 1.0) <= 1e-12, f"total {total!r}"

    def loss_keeps_fidelity():
        perf = heralded_performance(ApparatusParams(eta=0.3, scheme=Scheme.TWO_PHOTON))
        ok = abs(perf.fidelity - 1.0) <= 1e-12 and abs(perf.success_prob - 0.5 * 0.3 ** 2) <= 1e-12
        return ok, f"fidelity {perf.fidelity!r} success {perf.success_prob!r}"

    def dark_counts_degrade():
        fids = [
            heralded_performance(ApparatusParams(eta=0.1, dark_prob=d, scheme=Scheme.TWO_PHOTON)).fidelity
            for d in (1e-8, 1e-4, 1e-2)
        ]
        return fids[0] > fids[1] > fids[2], f"fidelities {fids}"

    rec.check("ideal_performance", ideal_performance)
    rec.check("single_click_states", heralded_states)
    rec.check("forgotten_detector_is_separable", which_detector_matters)
    rec.check("three_qubit_extension", three_qubit_extension)
    rec.check("click_probabilities_sum_to_one", probabilities_sum_to_one)
    rec.check("loss_keeps_fidelity", loss_keeps_fidelity)
    rec.check("dark_counts_degrade_fidelity", dark_counts_degrade)
    return rec.results


SUITES = {
    "graph": graph_suite,
    "pattern": pattern_suite,
    "growth": growth_suite,
    "erasure": erasure_suite,
}


def selected_suites(selector: str) -> list[str]:
    names = [n for n in selector.split(",") if n]
    if "all" in names:
        return list(VERIFY_SUITES)
    return [n for n in VERIFY_SUITES if n in names]


def injected_failure() -> CheckResult:
    """Заведомо ложное утверждение: несвязный граф не эквивалентен цепочке."""
    rec = _Recorder("injected")
    rec.check("disconnected_vs_chain", lambda: lc_equivalent(graph_state(3, [(0, 1)]), [(0, 1), (1, 2)]))
    return rec.results[0]


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    cases = scenario.trials if scenario.trials > 1 else DEFAULT_CASES
    results: list[CheckResult] = []
    for name in selected_suites(scenario.suite):
        rng = trial_rng(scenario.seed, VERIFY_SUITES.index(name))
        logger.info(f"Набор проверок {name}: {cases} случаев")
        results += SUITES[name](rng, cases)
    if scenario.inject_failure:
        results.append(injected_failure())

    summary: dict[str, dict[str, int]] = {}
    for r in results:
        counts = summary.setdefault(r.suite, {"passed": 0, "failed": 0})
        counts["passed" if r.passed else "failed"] += 1
    failures = [f"{r.suite}/{r.name}" for r in results if not r.passed]
    aggregate = {
        "suites": summary,
        "checks": len(results),
        "failures": failures,
        "passed": not failures,
    }
    logger.info(f"Проверено {len(results)}, не прошло {len(failures)}")
    payloads = [r.model_dump() for r in results]
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        traces=payloads if traces else [],
    )
