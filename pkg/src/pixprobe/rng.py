"""Seeded pseudo-random number generator for the randomized kernels.

xoshiro128++ with 32-bit lanes. The state lives in an ``int64[4]`` array and
every intermediate stays below 2**48, so the arithmetic is exact both under
numba's int64 and under Python's arbitrary-precision ints: the compiled and
interpreted kernel paths draw identical sequences, and a fixed 64-bit seed
reproduces a run bit-for-bit.

Seeding mixes the two 32-bit halves of the seed through murmur3's fmix32
finalizer so nearby seeds produce unrelated streams.
"""

import numpy as np

from .accel import jit

_M32 = 0xFFFFFFFF


@jit
def _mul32(a, b):
    # (a * b) mod 2**32 via a 16-bit split; partial products stay < 2**48.
    b_lo = b & 0xFFFF
    b_hi = (b >> 16) & 0xFFFF
    return (a * b_lo + ((a * b_hi) & 0xFFFF) * 0x10000) & 0xFFFFFFFF


@jit
def _rotl32(x, k):
    return ((x << k) | (x >> (32 - k))) & 0xFFFFFFFF


@jit
def _fmix32(h):
    h = (h ^ (h >> 16)) & 0xFFFFFFFF
    h = _mul32(h, 0x85EBCA6B)
    h = (h ^ (h >> 13)) & 0xFFFFFFFF
    h = _mul32(h, 0xC2B2AE35)
    return (h ^ (h >> 16)) & 0xFFFFFFFF


@jit
def rng_next(state):
    """Advance xoshiro128++ and return the next value in [0, 2**32)."""
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = (_rotl32((s0 + s3) & 0xFFFFFFFF, 7) + s0) & 0xFFFFFFFF
    t = (s1 << 9) & 0xFFFFFFFF
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl32(s3, 11)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@jit
def rng_below(state, n):
    """Next value in [0, n). Modulo reduction; fine for search sampling."""
    return rng_next(state) % n


def seed_state(seed: int) -> np.ndarray:
    """Build the int64[4] xoshiro128++ state for a 64-bit seed."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    lo = seed & _M32
    hi = (seed >> 32) & _M32
    state = np.array(
        [
            _fmix32((lo + 0x9E3779B9) & _M32),
            _fmix32((hi + 0x85EBCA6B) & _M32),
            _fmix32(lo ^ 0xC2B2AE35),
            _fmix32(hi ^ 0x27D4EB2F),
        ],
        dtype=np.int64,
    )
    if not state.any():  # all-zero state would lock the generator
        state[3] = 1
    return state


class Xoshiro128:
    """Object wrapper around the kernel-level generator."""

    def __init__(self, seed: int = 0):
        self.state = seed_state(seed)

    def next_u32(self) -> int:
        return int(rng_next(self.state))

    def below(self, n: int) -> int:
        return int(rng_below(self.state, n))

    def uniform(self) -> float:
        """Float in [0, 1) with 32 bits of resolution."""
        return self.next_u32() / 4294967296.0
