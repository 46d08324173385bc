"""Seeded random streams.

Every consumer asks for a stream by ``(seed, label)``.  Streams use the
counter-based Philox generator keyed by the seed and a hash of the label,
so the draws for one purpose never depend on how many numbers another
purpose consumed, or on the order trials run in.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, label: str, *index: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape, scale: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian with ``E|z|^2 = scale**2``."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z * (scale / np.sqrt(2.0))
