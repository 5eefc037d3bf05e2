"""Pinned pseudo-random number generators.

Synthetic corpora and benchmark sample streams must be byte-identical across
runs, so everything random in this package flows through one fixed generator
pair: splitmix64 for seeding/derivation and xoshiro256** for the streams.
The vectorised variant steps many independent xoshiro lanes at once (lane k
is seeded from splitmix64 outputs 4k..4k+3, so lane 0 equals the scalar
stream for the same seed).
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """Counter-style 64-bit generator; used only to seed xoshiro streams."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def derive_seed(base: int, *labels: int) -> int:
    """Derive a sub-stream seed from a base seed and integer labels.

    Fixed mixing rule so every derived stream is reproducible: each label is
    folded into the running seed through one splitmix64 output.
    """
    s = base & MASK64
    for label in labels:
        s = SplitMix64(s ^ ((label & MASK64) * _GOLDEN & MASK64)).next_u64()
    return s


class Xoshiro256StarStar:
    """Scalar xoshiro256**, state seeded from splitmix64(seed)."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s0 = sm.next_u64()
        self._s1 = sm.next_u64()
        self._s2 = sm.next_u64()
        self._s3 = sm.next_u64()

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s0, self._s1, self._s2 = s0, s1, s2
        self._s3 = _rotl(s3, 45)
        return result

    def below(self, n: int) -> int:
        # Modulo draw; bias is < n/2**64, irrelevant at our population sizes.
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return self.next_u64() % n

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


class Xoshiro256Vector:
    """Lane-parallel xoshiro256** over numpy uint64 arrays.

    Each call to next_block() advances every lane once and returns one u64
    per lane. Only the synthetic-corpus generator uses this; it imports
    numpy lazily so the benchmark hot paths stay numpy-free.
    """

    def __init__(self, seed: int, lanes: int):
        import numpy as np

        self._np = np
        sm = SplitMix64(seed)
        raw = [sm.next_u64() for _ in range(4 * lanes)]
        state = np.array(raw, dtype=np.uint64).reshape(lanes, 4)
        self._s = [state[:, i].copy() for i in range(4)]
        self.lanes = lanes

    def _rotl_vec(self, x, k):
        np = self._np
        return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

    def next_block(self):
        np = self._np
        s0, s1, s2, s3 = self._s
        result = self._rotl_vec(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = self._rotl_vec(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def next_doubles(self):
        np = self._np
        return (self.next_block() >> np.uint64(11)) * 2.0**-53
