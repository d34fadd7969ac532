from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuboid_sieve.region import (
    P_LIMIT_32BIT,
    SPLIT_P,
    icbrt_ceil_ratio,
    in_region,
    pair_count_estimate,
    p_limit_32bit,
    q_bounds,
    region_pair_count,
)


def brute_q_low(p):
    # smallest positive q above min(cbrt(p/9), p/59)
    q = 1
    while not (59 * q >= p or 9 * q**3 >= p):
        q += 1
    return q


def test_bounds_examples():
    assert tuple(q_bounds(151)) == (151, 3, 8909)
    assert tuple(q_bounds(152)) == (152, 3, 8968)
    assert q_bounds(9000).q_low == 10
    assert q_bounds(1) == (1, 1, 59)


@pytest.mark.parametrize("p,expected", [(1, 1), (9, 1), (10, 2), (72, 2), (73, 3), (243, 3), (244, 4)])
def test_icbrt_ceil_ratio(p, expected):
    assert icbrt_ceil_ratio(p) == expected


def test_q_low_matches_real_bound_small():
    for p in range(1, 5001):
        assert q_bounds(p).q_low == brute_q_low(p), p


def test_branch_choice_around_split():
    # below the split the linear bound is the smaller one, above it the cube-root bound
    for p in range(1, SPLIT_P):
        assert Fraction(p, 59) ** 3 <= Fraction(p, 9)
    for p in range(SPLIT_P, SPLIT_P + 2000):
        assert Fraction(p, 59) ** 3 >= Fraction(p, 9)


@settings(max_examples=300, deadline=None)
@given(st.integers(SPLIT_P, 10**9))
def test_cube_root_bound_is_tight(p):
    q = q_bounds(p).q_low
    assert 9 * q**3 >= p
    assert 9 * (q - 1) ** 3 < p


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**9))
def test_bounds_monotone(p):
    a, b = q_bounds(p), q_bounds(p + 1)
    assert a.q_low <= b.q_low
    assert b.q_high == a.q_high + 59


def test_in_region():
    assert in_region(152, 3) and in_region(152, 8968)
    assert not in_region(152, 2) and not in_region(152, 8969)
    assert not in_region(0, 5) and not in_region(5, 0)


def test_pair_count_estimate():
    assert pair_count_estimate(154000) == 699626543000
    assert pair_count_estimate(1) == 59
    assert pair_count_estimate(100) == 297950
    assert pair_count_estimate(100) == sum(59 * p for p in range(1, 101))
    with pytest.raises(ValueError):
        pair_count_estimate(0)


def test_region_pair_count_small_branch():
    # lattice points with q_low = ceil(p/59) counted by brute force
    assert region_pair_count(1, 151) == 676959
    assert region_pair_count(1, 151) == sum(
        1 for p in range(1, 152) for q in range(1, 59 * p + 1) if 59 * q >= p or 9 * q**3 >= p
    )


def test_p_limit():
    assert p_limit_32bit() == P_LIMIT_32BIT == 72796055
    assert 59 * P_LIMIT_32BIT < 2**32 <= 59 * (P_LIMIT_32BIT + 1)
    assert q_bounds(P_LIMIT_32BIT).q_high < 2**32


@pytest.mark.parametrize("p", [0, -1])
def test_nonpositive_p_rejected(p):
    with pytest.raises(ValueError):
        q_bounds(p)
