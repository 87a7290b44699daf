"""Deterministic 64-bit randomness shared by every execution path.

All sampling in this package flows through a splitmix64 stream: the state
advances by a fixed odd constant and the output is the standard three-round
multiply-xorshift finalizer.  The same arithmetic is replicated on uint64
inside the compiled kernels (see kernels.py), so a trajectory is reproducible
bit for bit across platforms, thread counts, and the compiled/fallback paths.

Uniform doubles are built as (u64 >> 11) * 2**-53, i.e. 53 random bits in
[0, 1).
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB


def finalize64(z: int) -> int:
    """splitmix64 output scrambler: three multiply-xorshift rounds on u64."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def mix64(a: int, b: int) -> int:
    """Combine two 64-bit words into one scrambled seed.

    Defined as finalize64(finalize64(a ^ GOLDEN) + (b + 1) * GOLDEN mod 2**64).
    Used to derive per-episode seeds from (base_seed, episode_index) and
    per-episode learner streams from (learner_seed, episode_seed).
    """
    z = finalize64((a & MASK64) ^ GOLDEN)
    z = (z + ((b & MASK64) + 1) * GOLDEN) & MASK64
    return finalize64(z)


def u64_to_unit(z: int) -> float:
    """Map a 64-bit word to a double in [0, 1) using its top 53 bits."""
    return ((z & MASK64) >> 11) * 2.0**-53


class SplitMix64:
    """Sequential splitmix64 stream over Python integers."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return finalize64(self.state)

    def next_unit(self) -> float:
        """Next uniform double in [0, 1)."""
        return u64_to_unit(self.next_u64())
