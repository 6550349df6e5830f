"""Named, seed-derived random substreams.

Every source of randomness in a run is a PCG64 generator derived from the
master seed plus a (concern, index...) key. Separate concerns never share a
stream, so e.g. enabling an anomaly cannot perturb the mobility or traffic
draws that happen before its window opens.
"""

import numpy as np

# Stream ids; keep stable, they are part of the reproducibility contract.
MOBILITY = 1
TRAFFIC = 2
ANOMALY = 3
CAPACITY = 4
ACTIVITY = 5
MIGRATION = 6
INIT = 7


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for `key` under master `seed`. Deterministic."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))
