"""Deterministic, splittable random streams.

Every stochastic component draws from a stream derived from a master seed
plus an explicit integer path, so runs are reproducible across platforms
and independent across scenes.
"""
from __future__ import annotations

import zlib

import numpy as np


def key(name: str) -> int:
    """Stable integer key for a named purpose (hash() is salted, crc32 is not)."""
    return zlib.crc32(name.encode("utf-8"))


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for (master_seed, path); disjoint paths give independent streams."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))
