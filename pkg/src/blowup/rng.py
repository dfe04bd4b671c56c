"""Seed handling: every random stream derives from one integer seed.

The split schedule is fixed so that partial reruns are reproducible::

    root = SeedSequence(seed)
    root.spawn(3) -> [instance generation, selection sampling, MIS / batching]

Instance generation uses the children of the generation stream: child ``k``
for the ``k``-th cluster edge in sorted order, then one child for
restrictions and one for random pattern generation. Children are addressed
by their spawn path, so no stream depends on how often another was used.
"""

from __future__ import annotations

import numpy as np

STREAMS = ("generate", "select", "mis")


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child(seed, *path: int) -> np.random.SeedSequence:
    """The SeedSequence reached from ``seed`` by spawning along ``path``."""
    root = seed_sequence(seed)
    return np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + tuple(path))


def split(seed) -> dict[str, np.random.SeedSequence]:
    return {name: child(seed, k) for k, name in enumerate(STREAMS)}


def stream(seed, name: str) -> np.random.Generator:
    return np.random.default_rng(split(seed)[name])


def generation_seeds(seed, n_edges: int) -> dict:
    """Seeds for one instance: per cluster edge, restrictions, random pattern."""
    return {
        "edges": [child(seed, 0, k) for k in range(n_edges)],
        "restrictions": child(seed, 0, n_edges),
        "pattern": child(seed, 0, n_edges + 1),
    }
