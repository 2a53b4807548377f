"""Reproducible random-number streams.

All randomness flows from one root seed through named substreams: a stream
is addressed by a path of small integers (repetition index, component index,
...), so concurrent execution order never changes any result.  The bit
generator is counter-based (Philox), which makes the streams cheap to split.
"""
from __future__ import annotations

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by (seed; path...)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))
