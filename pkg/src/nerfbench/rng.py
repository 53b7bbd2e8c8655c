"""Seeded random streams.

Every stochastic step in the package draws from a Philox-4x64 generator, a
counter-based bit generator whose output for a given key is identical on all
platforms. Seeds such as 2057 therefore name one fixed stream everywhere.
"""
import numpy as np

# stream ids keep independent consumers of one seed from overlapping
STREAM_INIT = 0
STREAM_TRAIN = 1
STREAM_EVAL = 2


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))
