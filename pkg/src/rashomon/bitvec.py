"""Bitvector helpers.

A bitvector over N examples is a plain Python int: bit n (LSB first) is
example n.  Arbitrary-precision ints give exact, allocation-cheap AND/OR/XOR
and popcount, which is all the search kernels need.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def full_mask(n: int) -> int:
    """All-ones bitvector of length n."""
    return (1 << n) - 1


def popcount(bits: int) -> int:
    return bits.bit_count()


def from_bits(values: Iterable[int]) -> int:
    """Pack an iterable of 0/1 ints, element i -> bit i."""
    out = 0
    for i, v in enumerate(values):
        if v:
            out |= 1 << i
    return out


def to_bits(bits: int, n: int) -> list[int]:
    """Unpack to a list of n ints."""
    return [(bits >> i) & 1 for i in range(n)]


def pack_words(bits: int, n: int) -> list[int]:
    """Split into little-endian 64-bit words covering n bits.

    Used to hand bitvectors to the compiled core.
    """
    n_words = (n + 63) // 64 if n else 1
    return [(bits >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(n_words)]


def indices(bits: int) -> list[int]:
    """Positions of the set bits, ascending."""
    out = []
    i = 0
    while bits:
        tz = (bits & -bits).bit_length() - 1
        i += tz
        out.append(i)
        bits >>= tz + 1
        i += 1
    return out


def subset_bits(bits: int, keep: Sequence[int]) -> int:
    """Re-index a bitvector onto the positions listed in keep."""
    out = 0
    for new_i, old_i in enumerate(keep):
        if (bits >> old_i) & 1:
            out |= 1 << new_i
    return out
