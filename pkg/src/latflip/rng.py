"""Seedable 64-bit pseudorandom generator with cross-backend identical output.

xoshiro256** seeded through splitmix64.  The compiled and pure-Python chain
kernels embed the same update, so trajectories are bit-identical regardless of
backend or platform.  Uniform doubles use the top 53 bits; bounded integers
use unbiased rejection sampling.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_DOUBLE_SCALE = 2.0 ** -53


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def derive_seed(seed: int, *indices: int) -> int:
    """Stable child seed for fan-out (workers, repetitions)."""
    s = seed & _MASK
    for k in indices:
        s ^= ((k + 1) * 0xD2B74407B1CE6E93) & _MASK
        _, s = splitmix64(s)
    return s


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256StarStar:
    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        st = seed & _MASK
        st, self.s0 = splitmix64(st)
        st, self.s1 = splitmix64(st)
        st, self.s2 = splitmix64(st)
        st, self.s3 = splitmix64(st)
        if self.s0 == self.s1 == self.s2 == self.s3 == 0:
            self.s0 = 1

    @property
    def state(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)

    def set_state(self, state: tuple[int, int, int, int]) -> None:
        self.s0, self.s1, self.s2, self.s3 = (v & _MASK for v in state)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def randrange(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("empty range")
        rem = (1 << 64) % n
        bound = (1 << 64) - rem
        while True:
            r = self.next_u64()
            if r < bound:
                return r % n
