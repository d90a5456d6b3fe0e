"""Seeded random streams.

Every stochastic operation in the toolkit draws from a counter-based Philox
(4x64) bit generator keyed by ``(seed, stream)``.  The stream word keeps
replicates, sweep points and sampling blocks statistically independent while
remaining reproducible from a single user-facing seed, on any platform.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError

_MASK64 = (1 << 64) - 1


def philox_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator over Philox keyed by the (seed, stream) pair."""
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise InputError("seed must fit in 64 bits")
    key = np.array([seed, int(stream) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit child seed for replicate / sweep-point ``index``."""
    state = np.random.SeedSequence([int(seed) & _MASK64, int(index)])
    return int(state.generate_state(1, np.uint64)[0])
