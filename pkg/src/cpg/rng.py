"""Counter-based random streams keyed by run seed and a name.

Every rule gets its own Philox stream derived from ``crc32(name)``, so
adding or removing a rule never shifts the noise another rule sees.
"""
from __future__ import annotations

import zlib

import numpy as np

ALGORITHM = "numpy.Philox/crc32-v1"


def stream_key(seed: int, name: str) -> int:
    return (int(seed) & 0xFFFFFFFF) << 32 | zlib.crc32(name.encode("utf-8"))


class Streams:
    """Lazily created, named numpy generators for one training run."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        gen = self._streams.get(name)
        if gen is None:
            gen = np.random.Generator(np.random.Philox(key=stream_key(self.seed, name)))
            self._streams[name] = gen
        return gen

    __getitem__ = get
