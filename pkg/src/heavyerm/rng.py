"""Seeded random streams.

Every stream is a Philox generator (counter-based, 64-bit keyed) built from a
``SeedSequence``. Sub-streams are addressed by integer keys, so replication
``k`` of grid point ``n`` under master seed ``s`` always sees the same draws
regardless of execution order.
"""
from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse ``(seed, *key)`` to a single 64-bit seed."""
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
