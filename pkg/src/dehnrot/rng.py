"""Counter-based random streams derived from a single integer seed."""

import zlib

import numpy as np


def make_rng(seed: int, stream: str = "") -> np.random.Generator:
    """Philox generator for the named stream of ``seed``.

    Distinct stream names give independent generators; the same (seed,
    stream) pair always reproduces the same draws.
    """
    key = zlib.crc32(stream.encode())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(key,))))
