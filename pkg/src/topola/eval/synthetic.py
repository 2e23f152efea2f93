"""Synthetic benchmark graphs."""
from __future__ import annotations

import numpy as np

from .._rng import make_rng


def gnm_graph(n, m, seed=None) -> np.ndarray:
    """Uniform random simple graph with exactly m edges."""
    pairs = n * (n - 1) // 2
    if m > pairs:
        raise ValueError(f"{m} edges do not fit in {n} nodes")
    rng = make_rng(seed)
    chosen = rng.choice(pairs, size=m, replace=False)
    iu, ju = np.triu_indices(n, k=1)
    A = np.zeros((n, n))
    A[iu[chosen], ju[chosen]] = 1.0
    return A + A.T


def planted_partition(n=200, blocks=10, p_in=0.3, p_out=0.01, seed=None):
    """Stochastic block model with equal-sized blocks; returns (A, block labels)."""
    rng = make_rng(seed)
    labels = np.arange(n) * blocks // n
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, p_in, p_out)
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    A = upper.astype(float)
    return A + A.T, labels
