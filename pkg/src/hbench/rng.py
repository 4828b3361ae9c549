"""Counter-based random streams.

Every Monte Carlo chunk draws from its own Philox stream whose 128-bit key is
``(seed << 64) | chunk_index``. Results therefore depend only on the seed and
the chunk layout, never on how chunks are scheduled across workers.
"""
from __future__ import annotations

import numpy as np

CHUNK = 4096
MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    key = ((int(seed) & MASK64) << 64) | (int(index) & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def chunks(n: int, size: int = CHUNK):
    """Yield (chunk_index, start, stop) covering range(n)."""
    for i, start in enumerate(range(0, n, size)):
        yield i, start, min(n, start + size)
