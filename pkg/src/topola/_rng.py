"""Seed plumbing: one user seed, independent streams per component."""
from __future__ import annotations

import numpy as np

# Fixed counters; reordering these changes every seeded result.
COMPONENTS = {"folds": 0, "sketch": 1, "graph": 2, "inner": 3}


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def component_seed(seed: int, component: str, *extra: int) -> np.random.SeedSequence:
    """Counter-based child of ``seed`` for a named component."""
    return np.random.SeedSequence(seed, spawn_key=(COMPONENTS[component], *extra))


def component_rng(seed: int, component: str, *extra: int) -> np.random.Generator:
    return np.random.default_rng(component_seed(seed, component, *extra))
