"""Deterministic 64-bit PRNG used for every random draw in the package.

All gamma constants, start-system coefficients, hyperplane slices and
monodromy loops are derived from a single seed through this generator, so
a (seed, options) pair fully determines the output of a solve.  The
generator is a plain splitmix64: tiny, portable, and identical on every
platform, which is what the byte-level reproducibility guarantees rest on.
"""

from __future__ import annotations

import math

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Seedable splitmix64 stream with a few float/complex helpers."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def unit_complex(self) -> complex:
        """Uniform point on the complex unit circle."""
        theta = 2.0 * math.pi * self.uniform()
        return complex(math.cos(theta), math.sin(theta))

    def complex_box(self, scale: float = 1.0) -> complex:
        """Complex number with re/im uniform in (-scale, scale)."""
        return complex(
            scale * (2.0 * self.uniform() - 1.0),
            scale * (2.0 * self.uniform() - 1.0),
        )

    def fork(self, tag: int) -> "SplitMix64":
        """Independent child stream; deterministic in (parent seed, tag)."""
        return SplitMix64(_mix((self.state ^ _mix(tag & _MASK)) & _MASK))
