"""Counter-based random streams.

Every sampling task draws from its own Philox stream keyed by
``(seed, *stream)``; results therefore do not depend on how tasks are scheduled.
"""

import numpy as np


def stream_rng(seed, *stream):
    """Independent generator for the stream ``stream`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
