"""Seed handling: every stochastic entry point accepts an int seed or a Generator."""

import numpy as np


def as_generator(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def spawned(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic child stream for (master seed, structured index)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
