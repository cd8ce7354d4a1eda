"""Counter-based random streams for benchmark trials.

Each trial owns a Philox generator keyed by ``(seed, experiment, n, trial)``, so a
trial's draws do not depend on which thread runs it or in which order.
"""

from __future__ import annotations

import zlib

import numpy as np


def experiment_key(experiment: str) -> int:
    return zlib.crc32(experiment.encode("utf-8"))


def trial_seed_sequence(seed: int, experiment: str, n: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(experiment_key(experiment), n, trial))


def trial_generator(seed: int, experiment: str, n: int, trial: int) -> np.random.Generator:
    """Independent generator for one ``(n, trial)`` cell of an experiment."""
    return np.random.Generator(np.random.Philox(trial_seed_sequence(seed, experiment, n, trial)))


def trial_seed(seed: int, experiment: str, n: int, trial: int) -> int:
    """A 32-bit integer seed derived from the same key, for seeded steps such as splitting."""
    return int(trial_seed_sequence(seed, experiment, n, trial).generate_state(1)[0])
