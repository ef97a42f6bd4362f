"""Seeded, portable random streams.

Every stochastic quantity in the toolkit is drawn from a PCG64 stream keyed by
``(seed, domain, *keys)``; the domain tag keeps e.g. rod trajectories and
embedding noise independent even when they share a user seed.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

ROD = 1
ANCHOR = 2
NOISE = 3
MEANSHIFT = 4


def stream(seed: int, domain: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed) & _MASK64, int(domain), *(int(k) for k in keys)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
