import numpy as np


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Сид испытания: индекс испытания подмешивается к главному сиду."""
    return np.random.SeedSequence([master_seed, trial_index])


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(master_seed, trial_index))
