from typing import Callable

from experiments import budget, entangle, grow, prune, run_pattern, verify
from experiments.outcome import ExperimentOutcome
from schemas import Experiment, Scenario

Handler = Callable[..., ExperimentOutcome]

HANDLERS: dict[Experiment, Handler] = {
    Experiment.ENTANGLE: entangle.run,
    Experiment.GROW: grow.run,
    Experiment.RUN_PATTERN: run_pattern.run,
    Experiment.PRUNE: prune.run,
    Experiment.BUDGET: budget.run,
    Experiment.VERIFY: verify.run,
}


def get_handler(scenario: Scenario) -> Handler:
    return HANDLERS[scenario.experiment]
