"""Эксперимент prune: вырезание целевого графа из кластера измерениями Паули."""
import logging
from pathlib import Path

import numpy as np

from engine.graph_clifford import LC_CHECK_LIMIT, lc_equivalent
from engine.mbqc import parse_target_graph, prune_cluster, run_pruned
from experiments.outcome import ExperimentOutcome
from schemas import Scenario
from scripts.trial_pool import run_trials

logger = logging.getLogger("mbqc_runner")


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    if scenario.target is None:
        raise ValueError("prune needs a target adjacency file")
    target = parse_target_graph(Path(scenario.target).read_text(encoding="utf-8"))
    prelude = prune_cluster(scenario.rows, scenario.cols, target)
    # рёбра цели в нумерации плотного состояния (вершины по возрастанию)
    position = {v: i for i, v in enumerate(target.vertices)}
    local_edges = [(position[a], position[b]) for a, b in target.edges]
    checkable = len(target.vertices) <= LC_CHECK_LIMIT

    def trial(index: int, rng: np.random.Generator):
        register, state = run_pruned(scenario.rows, scenario.cols, target, rng)
        payload = {
            "remaining": register.vertices,
            "edges": [list(e) for e in register.edges],
            "lc_equivalent": lc_equivalent(state, local_edges) if checkable else None,
        }
        return payload, state

    results = run_trials(trial, scenario.seed, scenario.trials, scenario.workers)
    payloads = [payload for payload, _ in results]
    aggregate = {
        "rows": scenario.rows,
        "cols": scenario.cols,
        "target_vertices": target.vertices,
        "target_edges": [list(e) for e in target.edges],
        "z_measurements": sum(axis == "Z" for _, axis in prelude),
        "y_measurements": sum(axis == "Y" for _, axis in prelude),
        "prelude": [[v, axis] for v, axis in prelude],
    }
    if checkable:
        aggregate["all_lc_equivalent"] = all(p["lc_equivalent"] for p in payloads)
    logger.info("prune %dx%d -> %d vertices", scenario.rows, scenario.cols, len(target.vertices))

    rows = [{"trial": t, "remaining": len(p["remaining"]), "edges": len(p["edges"])}
            for t, p in enumerate(payloads)] if traces else []
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        traces=rows,
        final_state=results[0][1] if dump_state else None,
    )
