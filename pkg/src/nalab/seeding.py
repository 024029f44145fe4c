"""Seed-to-stream mapping for every random draw in the package.

A run seed ``s`` and a tuple of non-negative integer stream labels
``(a, b, ...)`` select the generator
``Generator(Philox(SeedSequence([s, a, b, ...])))``.  Philox is
counter-based, so streams are independent of each other and of the
order in which they are consumed.
"""

import numpy as np

__all__ = ["stream_rng", "STREAMS"]

# fixed labels so that adding a new consumer never shifts an existing one
STREAMS = {
    "net": 1,
    "lemma_a": 2,
    "segment": 3,
    "convexity": 4,
    "proximinality": 5,
}


def stream_rng(seed, *stream):
    """Independent ``numpy`` generator for ``seed`` and stream labels."""
    labels = [STREAMS[s] if isinstance(s, str) else int(s) for s in stream]
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *labels])
    return np.random.Generator(np.random.Philox(seq))
