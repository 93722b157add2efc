"""Seeded SplitMix64 generator and labeled seed derivation.

Every random draw in the package goes through :class:`SplitMix64` so that
splits, bootstrap samples and synthetic data are reproducible from a single
unsigned 64-bit root seed, independent of numpy's generator versions.

Algorithm (Steele, Lea & Flood 2014)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

all arithmetic modulo 2**64. Doubles in [0, 1) take the top 53 bits.
Child seeds are ``blake2b(seed_le64 || label_utf8, digest_size=8)`` read
little-endian.
"""

from __future__ import annotations

import hashlib
import math

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(seed: int, label: str) -> int:
    """Child seed for a named stage, e.g. ``derive_seed(7, "forest/3")``."""
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    h = hashlib.blake2b(seed.to_bytes(8, "little") + label.encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "little")


class SplitMix64:
    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Unbiased integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n > 0")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def gauss(self) -> float:
        # Box-Muller, one variate per call (no cached pair) to keep the stream simple
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, walking from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, n: int, k: int) -> list[int]:
        """``k`` distinct indices from ``range(n)`` via partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
