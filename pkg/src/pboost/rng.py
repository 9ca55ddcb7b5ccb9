"""Deterministic, splittable random streams.

Every randomized operation in the package takes an RngStream instead of a
shared generator. A stream is identified by a 64-bit seed plus a path of
integers, so any (experiment, replication, variant, purpose) coordinate can
recreate its draws independently of execution order, which keeps parallel
runs bit-identical to sequential ones.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


def _as_key(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key) & 0xFFFFFFFF


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream keyed by (seed, path).

    The same (seed, path) always produces the same draws; `child` derives
    disjoint substreams without consuming state from the parent.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *keys: int | str) -> "RngStream":
        """Derive a substream; string keys hash to stable 32-bit integers."""
        return RngStream(self.seed, self.path + tuple(_as_key(k) for k in keys))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))
