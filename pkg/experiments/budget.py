import logging

from engine.budget import link_budget, purcell
from experiments.outcome import ExperimentOutcome
from schemas import BudgetReport, Scenario
from scripts.presets import preset_note

logger = logging.getLogger("hardware_budget")


def build_report(scenario: Scenario) -> BudgetReport:
    link = link_budget(
        attempt_time=scenario.attempt_time,
        eta=scenario.eta,
        scheme=scenario.scheme,
        client_t2=scenario.client_t2,
        fault_budget=scenario.fault_budget,
        note=preset_note(scenario.preset),
    )
    cavity = scenario.cavity
    return BudgetReport(
        link=link,
        spin=scenario.spin,
        purcell_factor=purcell(cavity) if cavity is not None else None,
    )


def run(scenario: Scenario, traces: bool = False, dump_state: bool = False) -> ExperimentOutcome:
    """Детерминированный расчёт: испытания и сид не используются."""
    report = build_report(scenario)
    logger.info("link budget: p=%.3e, edge every %.3e s, %.1f edges per T2",
                report.link.p_success, report.link.edge_time, report.link.edges_per_coherence)
    if report.link.note:
        logger.info(report.link.note)
    aggregate = report.model_dump(mode="json")
    aggregate["passed"] = report.link.within_fault_budget
    if not aggregate["passed"]:
        logger.warning("edge time exceeds the fault budget of the client qubit")
    return ExperimentOutcome(aggregate=aggregate, trial_payloads=[aggregate])
