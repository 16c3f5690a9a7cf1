"""Counter-based random streams.

Each experiment seed derives independent Philox streams through fixed labels,
one per consumer, so environment noise, policy randomness and thermal-chain
bits never interleave.  That keeps traces reproducible when seeds run in
parallel or components change their draw order relative to each other.
"""

import numpy as np
from scipy.special import ndtr, ndtri

STREAM_LABELS = {
    "envgen": 0,    # random environment vectors, arm sets
    "env": 1,       # reward noise / measurement outcomes
    "policy": 2,    # policy-internal randomness (initial estimators)
    "thermal": 3,   # thermal battery chain bits
}


def stream(seed, label):
    """Philox generator for (seed, label); label must be registered."""
    code = STREAM_LABELS[label]
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(code,))
    return np.random.Generator(np.random.Philox(seq))


def random_unit(gen, dim):
    """Uniform random unit vector from a generator."""
    while True:
        v = gen.standard_normal(dim)
        n = float(np.sqrt(np.sum(v * v)))
        if n > 1e-12:
            return v / n


TRUNC_RANGE = 4.0
_CDF_LO = ndtr(-TRUNC_RANGE)
_CDF_SPAN = ndtr(TRUNC_RANGE) - _CDF_LO


def truncated_standard_normal(u):
    """Map uniform(0,1) draws to standard normals truncated at +-4 sigma.

    Inverse-CDF form so exactly one uniform is consumed per sample; scalar
    or array input.
    """
    return ndtri(_CDF_LO + _CDF_SPAN * np.asarray(u, dtype=float))
