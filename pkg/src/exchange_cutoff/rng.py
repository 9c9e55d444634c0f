"""Per-replica random streams.

Every replica owns a numpy ``Generator`` over the Philox-4x64 counter-based
bit generator. The 128-bit Philox key is ``master_seed | (replica << 64)``
and the counter starts at zero, so a (master seed, replica index) pair names
one stream and any Philox-4x64-10 implementation reproduces it.
"""

import numpy as np

ALGORITHM = "philox4x64-10/key=seed|replica<<64/numpy-generator"

_U64 = (1 << 64) - 1


def seed_stream(master, replica=0):
    """Return the random stream for ``replica`` under ``master``."""
    master = int(master)
    replica = int(replica)
    if not 0 <= master <= _U64:
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master}")
    if not 0 <= replica <= _U64:
        raise ValueError(f"replica index must be an unsigned 64-bit integer, got {replica}")
    return np.random.Generator(np.random.Philox(key=master | (replica << 64)))


def as_generator(rng):
    """Accept a Generator, an int seed, or None (seed 0) and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return seed_stream(0, 0)
    return seed_stream(int(rng), 0)
