"""Seeded random streams.

Every run draws from ``numpy.random.PCG64`` seeded with an integer, and
consumes a fixed number of uniforms per step in blocks, so a run is a pure
function of ``(model parameters, steps, seed)`` on any platform.
"""
from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64"
RNG_VERSION = np.__version__
CHUNK = 1 << 16


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise ValueError("an explicit integer seed is required for reproducible runs")
    return np.random.Generator(np.random.PCG64(int(seed)))


def blocks(rng: np.random.Generator, steps: int, per_step: int, chunk: int = CHUNK):
    """Yield ``(offset, n, uniforms)`` with ``uniforms.size == n * per_step``."""
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        yield done, n, rng.random(n * per_step)
        done += n
