"""Named random streams derived from one integer seed.

Each purpose gets its own generator, so adding a consumer never shifts the
draws seen by another.
"""

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))
