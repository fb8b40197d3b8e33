"""Deterministic RNG stream derivation.

Every stochastic component draws from its own generator derived from the run's
root seed plus integer tags (purpose, step, iteration, ...), so results do not
depend on call order elsewhere and reruns are reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *tags: int) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
