"""
Эксперимент grow: рост ветви (branch) или брокерная сборка графа (broker).
"""
import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np

from engine import statevec as sv
from engine.graph_clifford import GraphRegister, to_dense
from engine.growth import (
    edge_time,
    grow_branch,
    grow_brokered_graph,
    new_branch,
    new_broker_node,
    simulate_branch_growth,
)
from engine.mbqc import parse_target_graph
from experiments.outcome import ExperimentOutcome, within_band, z_score
from schemas import Scenario, Strategy
from scripts.trial_pool import run_trials

logger = logging.getLogger("growth")

# стартовая длина физической ветви, если initial_length не задан
PHYSICAL_BRANCH_LENGTH = 4


def _mean_and_stderr(values: list[float]) -> tuple[float, float]:
    data = np.asarray(values, dtype=float)
    if len(data) < 2:
        return float(data.mean()), 0.0
    return float(data.mean()), float(data.std(ddof=1) / math.sqrt(len(data)))


def _dense_or_none(register: GraphRegister, vertices: Optional[list[int]] = None) -> Optional[sv.PureState]:
    count = len(register) if vertices is None else len(vertices)
    if count == 0 or count > sv.PURE_QUBIT_LIMIT:
        logger.warning("state of %d qubits is not dumped", count)
        return None
    return to_dense(register, vertices)


# ==========================================
# ВЕТВЬ
# ==========================================

def _run_branch(scenario: Scenario, traces: bool, dump_state: bool) -> ExperimentOutcome:
    link = scenario.link
    p = link.p_success
    registers: dict[int, GraphRegister] = {}

    def trial(index: int, rng: np.random.Generator):
        if scenario.physical:
            register = GraphRegister()
            branch = new_branch(register, scenario.initial_length or PHYSICAL_BRANCH_LENGTH)
            stats = grow_branch(register, branch, link, scenario.steps, rng)
            if index == 0:
                registers[0] = register
            return stats
        ensemble = simulate_branch_growth(
            p, scenario.steps, 1, rng,
            initial_length=scenario.initial_length,
            attempt_time=link.attempt_time,
            keep_trace=traces and index == 0,
        )
        return ensemble.trials[0]

    stats = run_trials(trial, scenario.seed, scenario.trials, scenario.workers)
    payloads = [
        {
            "attempts": s.attempts,
            "successes": s.successes,
            "initial_length": s.initial_length,
            "final_length": s.final_length,
            "drift": s.drift,
            "exhausted": s.exhausted,
            "model_time_s": s.model_time,
        }
        for s in stats
    ]
    mean, stderr = _mean_and_stderr([s.drift for s in stats])
    expected = 3 * p - 1
    aggregate = {
        "strategy": Strategy.BRANCH.value,
        "physical": scenario.physical,
        "p_success": p,
        "steps": scenario.steps,
        "mean_drift": mean,
        "drift_stderr": stderr,
        "expected_drift": expected,
        "z": z_score(mean, expected, stderr),
        "drift_within_band": within_band(mean, expected, stderr),
        "exhausted_trials": sum(s.exhausted for s in stats),
    }
    logger.info("branch growth p=%.4g: drift %.4f +- %.4f (expected %.4f)", p, mean, stderr, expected)

    # трасса CSV - по первому испытанию, строка на шаг
    rows = [row.model_dump() for row in stats[0].trace] if traces else []
    final_state = _dense_or_none(registers[0]) if dump_state and 0 in registers else None
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        model_time_s=sum(s.model_time for s in stats),
        traces=rows,
        final_state=final_state,
    )


# ==========================================
# БРОКЕРЫ
# ==========================================

def _broker_edges(scenario: Scenario) -> list[tuple[int, int]]:
    """Рёбра клиентского графа: из файла target либо цепочка по всем узлам."""
    if scenario.target is not None:
        target = parse_target_graph(Path(scenario.target).read_text(encoding="utf-8"))
        if any(v >= scenario.broker_nodes for v in target.vertices):
            raise ValueError(f"target graph uses nodes outside 0..{scenario.broker_nodes - 1}")
        return target.edges
    return [(i, i + 1) for i in range(scenario.broker_nodes - 1)]


def _run_broker(scenario: Scenario, traces: bool, dump_state: bool) -> ExperimentOutcome:
    link = scenario.link
    if link.p_success <= 0:
        raise ValueError("brokered growth needs a positive success probability")
    edges = _broker_edges(scenario)
    registers: dict[int, tuple[GraphRegister, list[int]]] = {}

    def trial(index: int, rng: np.random.Generator):
        register = GraphRegister()
        nodes = [new_broker_node(register, i) for i in range(scenario.broker_nodes)]
        stats = grow_brokered_graph(register, nodes, list(edges), link, rng)
        client_of = {node.client: node.node_id for node in nodes}
        obtained = sorted(
            tuple(sorted((client_of[a], client_of[b])))
            for a, b in register.edges
            if a in client_of and b in client_of
        )
        clients = [node.client for node in nodes]
        if index == 0:
            registers[0] = (register, clients)
        return stats, obtained

    results = run_trials(trial, scenario.seed, scenario.trials, scenario.workers)
    payloads = [
        {
            "attempts": stats.attempts,
            "edges_created": stats.edges_created,
            "model_time_s": stats.model_time,
            "client_edges": [list(e) for e in obtained],
            "matches_target": obtained == sorted(edges),
        }
        for stats, obtained in results
    ]
    per_edge = [stats.attempts / len(edges) for stats, _ in results] if edges else [0.0]
    mean, stderr = _mean_and_stderr(per_edge)
    aggregate = {
        "strategy": Strategy.BROKER.value,
        "p_success": link.p_success,
        "broker_nodes": scenario.broker_nodes,
        "edges": [list(e) for e in edges],
        "mean_attempts_per_edge": mean,
        "attempts_stderr": stderr,
        "expected_attempts_per_edge": 1 / link.p_success,
        "edge_time_s": edge_time(link),
        "all_match_target": all(p["matches_target"] for p in payloads),
    }
    logger.info("brokered growth: %d edges, %.2f attempts per edge", len(edges), mean)

    final_state = None
    if dump_state and 0 in registers:
        register, clients = registers[0]
        final_state = _dense_or_none(register, clients)
    rows = [row.model_dump() for row in results[0][0].trace] if traces else []
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        model_time_s=sum(stats.model_time for stats, _ in results),
        traces=rows,
        final_state=final_state,
    )


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    if scenario.strategy == Strategy.BROKER:
        return _run_broker(scenario, traces, dump_state)
    return _run_branch(scenario, traces, dump_state)
