"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator (128-bit
state) keyed by ``(seed, purpose)``. Giving each purpose its own stream
means dilution and edge ordering never share random numbers, so a run that
skips dilution consumes the same edge order as one that performs it.
"""

import numpy as np

SWEEP = 0
DILUTE = 1
TRANSPARENT = 2
ORACLE = 3


def stream(seed: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose),))
    return np.random.Generator(np.random.PCG64(ss))
