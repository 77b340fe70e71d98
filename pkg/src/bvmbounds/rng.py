"""Reproducible random streams.

Every stochastic quantity is addressed by ``(seed, stream)``. The stream name
is hashed with CRC32 so that it is stable across processes and Python
versions, then used as the spawn key of a ``SeedSequence`` feeding the
counter-based Philox bit generator.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream_key(stream: str | int) -> int:
    if isinstance(stream, int):
        return stream
    return zlib.crc32(stream.encode("utf-8"))


def make_rng(seed: int, stream: str | int = "default") -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream_key(stream),))
    return np.random.Generator(np.random.Philox(seq))
