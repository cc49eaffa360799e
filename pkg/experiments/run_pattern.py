"""
Эксперимент run-pattern: исполнение шаблона измерений на случайных входах.

Шаблон берётся из файла pattern (JSON MeasurementPattern) или компилируется
из схемы circuit (JSON CircuitSpec). Для схемы каждый исправленный выход
сравнивается с прямым моделированием.
"""
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from engine import statevec as sv
from engine.mbqc import CircuitSpec, MeasurementPattern, compile_circuit, run_pattern, simulate_circuit
from experiments.outcome import ExperimentOutcome
from schemas import Scenario
from scripts.trial_pool import run_trials

logger = logging.getLogger("mbqc_runner")


def random_qubit(rng: np.random.Generator) -> sv.PureState:
    """Случайное однокубитное состояние, равномерное по сфере Блоха."""
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    return sv.single_qubit(*(amps / np.linalg.norm(amps)))


def load_pattern(scenario: Scenario) -> tuple[MeasurementPattern, Optional[CircuitSpec]]:
    if scenario.circuit is not None:
        circuit = CircuitSpec.model_validate(json.loads(Path(scenario.circuit).read_text(encoding="utf-8")))
        _, pattern = compile_circuit(circuit)
        return pattern, circuit
    if scenario.pattern is not None:
        data = json.loads(Path(scenario.pattern).read_text(encoding="utf-8"))
        return MeasurementPattern.model_validate(data), None
    raise ValueError("run-pattern needs a circuit or a pattern file")


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    pattern, circuit = load_pattern(scenario)
    blueprint = pattern.blueprint
    logger.info("pattern: %d vertices, %d measurements, %d inputs",
                len(blueprint.vertices), len(pattern.commands), len(blueprint.inputs))

    def trial(index: int, rng: np.random.Generator):
        inputs = [random_qubit(rng) for _ in blueprint.inputs]
        result = run_pattern(blueprint, pattern, inputs, rng)
        payload = {
            "outcomes": result.outcomes,
            "frame": [list(bits) for bits in result.frame.bits],
        }
        if circuit is not None:
            expected = simulate_circuit(circuit, inputs)
            payload["fidelity"] = abs(sv.overlap(expected, result.outputs)) ** 2
        return payload, result.outputs

    results = run_trials(trial, scenario.seed, scenario.trials, scenario.workers)
    payloads = [payload for payload, _ in results]
    aggregate = {
        "vertices": len(blueprint.vertices),
        "measurements": len(pattern.commands),
        "outputs": len(blueprint.outputs),
    }
    if circuit is not None:
        deficit = max(1.0 - p["fidelity"] for p in payloads)
        aggregate["min_fidelity"] = min(p["fidelity"] for p in payloads)
        aggregate["max_fidelity_deficit"] = deficit
        aggregate["matches_circuit"] = deficit < sv.ACCUM_TOL
        logger.info("pattern vs circuit: worst fidelity deficit %.3e", deficit)

    rows = []
    if traces:
        for t, p in enumerate(payloads):
            rows += [{"trial": t, "measurement": i, "outcome": o} for i, o in enumerate(p["outcomes"])]
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        traces=rows,
        final_state=results[0][1] if dump_state else None,
    )
