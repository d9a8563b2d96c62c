"""Seeded randomness helpers.

All stochastic components draw from numpy's PCG64 generator. A single master
seed is split into independent child seeds with ``numpy.random.SeedSequence``,
so every experiment is reproducible from one integer and no two components
share a stream.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator for the given seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive ``n`` independent 63-bit child seeds from a master seed.

    Deterministic: the same (seed, n) always yields the same children, and
    children for different indices never collide with each other in practice.
    """
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> 1) for c in children]


def child_seed(seed: int, key: int) -> int:
    """Derive the child seed at position ``key`` without materializing others."""
    child = np.random.SeedSequence(seed, spawn_key=(key,))
    return int(child.generate_state(1, dtype=np.uint64)[0] >> 1)
