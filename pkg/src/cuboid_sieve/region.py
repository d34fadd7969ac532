"""Integer bounds of the (p, q) search region.

For each p the admissible q form the segment

    min(cbrt(p / 9), p / 59) <= q <= 59 p

which splits at p = 152: below it the linear bound p/59 is the smaller one,
from 152 on the cube-root bound is.  All arithmetic is exact integer math.
"""

from __future__ import annotations

from typing import NamedTuple

SPLIT_P = 152
Q_RATIO = 59
P_LIMIT_32BIT = 2**32 // Q_RATIO


class RegionBounds(NamedTuple):
    p: int
    q_low: int
    q_high: int


def icbrt_ceil_ratio(p: int) -> int:
    """Smallest positive integer q with 9 * q**3 >= p."""
    if p <= 9:
        return 1
    lo, hi = 1, 1
    while 9 * hi**3 < p:
        hi *= 2
    # invariant: 9*lo**3 < p <= 9*hi**3
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if 9 * mid**3 >= p:
            hi = mid
        else:
            lo = mid
    return hi


def q_bounds(p: int) -> RegionBounds:
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    if p < SPLIT_P:
        q_low = max(1, -(-p // Q_RATIO))
    else:
        q_low = icbrt_ceil_ratio(p)
    return RegionBounds(p, q_low, Q_RATIO * p)


def in_region(p: int, q: int) -> bool:
    if p < 1 or q < 1:
        return False
    b = q_bounds(p)
    return b.q_low <= q <= b.q_high


def pair_count_estimate(p_max: int) -> int:
    """Sum of 59 p over p = 1 .. p_max (counts every q, coprime or not)."""
    if p_max < 1:
        raise ValueError("p_max must be positive")
    return Q_RATIO * p_max * (p_max + 1) // 2


def region_pair_count(p_first: int, p_last: int) -> int:
    """Exact number of (p, q) lattice points in the region for p in [p_first, p_last]."""
    total = 0
    for p in range(p_first, p_last + 1):
        b = q_bounds(p)
        total += b.q_high - b.q_low + 1
    return total


def p_limit_32bit() -> int:
    return P_LIMIT_32BIT
