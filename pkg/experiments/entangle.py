"""
Эксперимент entangle: повторные попытки стирания пути на паре эмиттеров.

Частоты картин щелчков сравниваются с точным перебором тех же параметров.
"""
import logging
import math

import numpy as np

from engine import statevec as sv
from engine.erasure import (
    ApparatusParams,
    herald_phase,
    heralded_performance,
    ideal_attempt,
    pattern_key,
    sample_clicks,
)
from experiments.outcome import ExperimentOutcome, SIGMA_BAND, z_score
from schemas import Scenario
from scripts.trial_pool import run_trials

logger = logging.getLogger("entangle")


def phase_label(p: complex | None) -> str | None:
    if p is None:
        return None
    if abs(p.imag) > abs(p.real):
        return "+i" if p.imag > 0 else "-i"
    return "+1" if p.real > 0 else "-1"


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    params = scenario.apparatus
    # в идеальном случае условное состояние чистое и его можно сохранить
    ideal = params == ApparatusParams.ideal()
    start = sv.init_plus(2)

    def trial(index: int, rng: np.random.Generator):
        if ideal:
            record = ideal_attempt(start, rng)
            payload = {
                "pattern": pattern_key(record.rounds),
                "accepted": record.accepted,
                "phase": phase_label(record.projection_phase),
                "false_herald": record.false_herald,
            }
            return payload, record.post_state if record.accepted else None
        rounds, accepted, false_herald = sample_clicks(None, params, rng)
        phase = None
        if accepted:
            phase = herald_phase(rounds)
        payload = {
            "pattern": pattern_key(rounds),
            "accepted": accepted,
            "phase": phase_label(phase),
            "false_herald": false_herald,
        }
        return payload, None

    results = run_trials(trial, scenario.seed, scenario.trials, scenario.workers)
    payloads = [payload for payload, _ in results]
    n = len(payloads)

    performance = heralded_performance(params)
    counts: dict[str, int] = {}
    for payload in payloads:
        counts[payload["pattern"]] = counts.get(payload["pattern"], 0) + 1

    patterns = {}
    worst = 0.0
    for key in sorted(set(counts) | set(performance.click_table)):
        expected = performance.click_table.get(key, 0.0)
        observed = counts.get(key, 0) / n
        stderr = math.sqrt(expected * (1 - expected) / n)
        z = z_score(observed, expected, stderr)
        worst = max(worst, abs(z))
        patterns[key] = {"count": counts.get(key, 0), "frequency": observed, "expected": expected, "z": z}

    accepted = sum(p["accepted"] for p in payloads)
    false_heralds = sum(p["false_herald"] for p in payloads)
    aggregate = {
        "attempts": n,
        "scheme": params.scheme.value,
        "patterns": patterns,
        "max_abs_z": worst,
        "frequencies_within_band": worst <= SIGMA_BAND,
        "success_frequency": accepted / n,
        "success_prob": performance.success_prob,
        "heralded_fidelity": performance.fidelity,
        "false_herald_frequency": false_heralds / n,
        "false_herald_prob": performance.false_herald_prob,
    }
    logger.info("entangle: %d attempts, success %.4g (exact %.4g), max |z| %.2f",
                n, accepted / n, performance.success_prob, worst)

    final_state = None
    if dump_state:
        final_state = next((state for _, state in results if state is not None), None)
    rows = [dict(trial=i, **payload) for i, payload in enumerate(payloads)] if traces else []
    return ExperimentOutcome(
        trial_payloads=payloads,
        aggregate=aggregate,
        model_time_s=n * scenario.attempt_time,
        traces=rows,
        final_state=final_state,
    )
