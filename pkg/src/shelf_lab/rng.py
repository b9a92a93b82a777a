"""Reproducible random streams.

Draws are counter based: draw ``j`` (0-based) of the stream with key ``K`` is

    u_j = (splitmix64(K + GOLDEN * (j + 1)) >> 11) * 2**-53

and the key of unit-of-work ``i`` under a run seed ``S`` is

    K_i = splitmix64(splitmix64(S) + GOLDEN * (i + 1))      (mod 2**64)

with the standard SplitMix64 finalizer. Because any draw can be computed
from ``(key, index)`` alone, results never depend on how work is split
across workers.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from ._backend import kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 output finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_key(seed: int, index: int) -> int:
    return mix64(mix64(seed) + GOLDEN * (index + 1))


class LetterStream(Protocol):
    def letters(self, count: int, thresholds: np.ndarray) -> np.ndarray: ...


class CounterStream:
    """Stream of uniforms keyed by a 64-bit key; one draw per letter."""

    def __init__(self, key: int, position: int = 0):
        self.key = key & MASK64
        self.position = position

    @classmethod
    def from_seed(cls, seed: int, index: int = 0) -> "CounterStream":
        return cls(substream_key(seed, index))

    def letters(self, count: int, thresholds: np.ndarray) -> np.ndarray:
        out = kernels.draw_letters(self.key, self.position, count, thresholds)
        self.position += count
        return out


class ReplayStream:
    """Feeds a fixed list of uniforms, e.g. to reproduce a known word."""

    def __init__(self, values: Sequence[float]):
        self.values = [float(v) for v in values]
        self.position = 0

    @classmethod
    def for_letters(cls, letters: Sequence[int], m: int) -> "ReplayStream":
        """Uniforms at the midpoint of each letter's pile interval (uniform case)."""
        return cls([(x - 0.5) / (2 * m) for x in letters])

    def letters(self, count: int, thresholds: np.ndarray) -> np.ndarray:
        if self.position + count > len(self.values):
            raise ValueError("replay stream exhausted")
        u = np.asarray(self.values[self.position : self.position + count])
        self.position += count
        return np.searchsorted(thresholds, u, side="right").astype(np.int64) + 1
