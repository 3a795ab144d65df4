"""Random stream derivation.

Every stream is ``PCG64(SeedSequence(root_seed, spawn_key=keys))``. The keys
are a tuple of small integers ``(experiment, grid index, replica, role)``, so
any stream can be rebuilt from the root seed without replaying the others,
and coupled systems share a stream simply by using the same keys.
"""

import numpy as np

EXPERIMENT_CODES = {
    "simulate": 1,
    "equilibrate": 2,
    "chaos-rate": 3,
    "cutoff-rate": 4,
    "diagnostics": 5,
    "w2": 6,
}

# roles within one replica
INIT = 0
EVENTS = 1
REF_INIT = 2
REF_EVENTS = 3


def stream(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))
