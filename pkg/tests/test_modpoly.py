import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuboid_sieve.modpoly import eval_q_exact, eval_q_mod, is_prime, q_coefficients_exact
from cuboid_sieve.sievetable import primes_between

# Expanded with sympy from the printed formula before the build.
COEFFS_1_2 = (1, 90, 905, 2140, 1920, -1024)
SMALL_PRIMES = primes_between(2, 97)


def test_coefficients_p1_q1():
    assert q_coefficients_exact(1, 1) == (1, 3, 2, -2, -3, -1)
    assert sum(q_coefficients_exact(1, 1)) == 0


def test_coefficients_p1_q2():
    assert tuple(q_coefficients_exact(1, 2)) == COEFFS_1_2


@pytest.mark.parametrize("p,q", [(1, 0), (0, 1), (0, 0), (-3, 2)])
def test_coefficients_reject_nonpositive(p, q):
    with pytest.raises(ValueError):
        q_coefficients_exact(p, q)


def test_no_overflow_for_64bit_inputs():
    p, q = 2**63 - 25, 2**63 - 165
    c = q_coefficients_exact(p, q)
    assert c.c0 == -(p**10) * q**10
    assert c.c0.bit_length() > 1200


def test_eval_exact_examples():
    assert eval_q_exact(1, 1, 1) == 0
    assert eval_q_exact(1, 5, 0) == -9765625
    assert eval_q_exact(1, 2, 1) == sum(COEFFS_1_2) == 4032


def test_eval_exact_against_degree10_expansion():
    # independent route: expand the t-polynomial term by term
    for p, q, t in [(2, 3, 5), (7, 4, 11), (152, 3, 40000)]:
        c5, c4, c3, c2, c1, c0 = q_coefficients_exact(p, q)
        direct = c5 * t**10 + c4 * t**8 + c3 * t**6 + c2 * t**4 + c1 * t**2 + c0
        assert eval_q_exact(p, q, t) == direct


@pytest.mark.parametrize(
    "args,expected",
    [((0, 5, 0, 11), 0), ((1, 1, 1, 7), 0), ((1, 0, 1, 11), 0)],
)
def test_eval_mod_examples(args, expected):
    assert eval_q_mod(*args) == expected


def test_q_zero_collapses_to_square():
    # with q = 0 the polynomial is t^6 (t^2 - p^4)^2
    for r in (11, 13, 97):
        for p in range(r):
            for t in range(r):
                assert eval_q_mod(p, 0, t, r) == pow(t, 6, r) * pow(t * t - p**4, 2, r) % r


@pytest.mark.parametrize("r", [1, 4, 9, 9697, 10007, 0])
def test_eval_mod_rejects_bad_modulus(r):
    with pytest.raises(ValueError):
        eval_q_mod(0, 0, 0, r)


def test_eval_mod_rejects_unreduced_residue():
    with pytest.raises(ValueError):
        eval_q_mod(11, 1, 1, 11)


def test_consistency_exhaustive_small():
    # p, q, t < 50 on a grid, every prime <= 97
    for r in SMALL_PRIMES:
        for p in range(1, 50, 7):
            for q in range(1, 50, 5):
                for t in range(0, 50, 3):
                    assert eval_q_mod(p % r, q % r, t % r, r) == eval_q_exact(p, q, t) % r


@settings(max_examples=300, deadline=None)
@given(
    st.integers(1, 49),
    st.integers(1, 49),
    st.integers(0, 49),
    st.sampled_from(SMALL_PRIMES),
)
def test_consistency_property(p, q, t, r):
    assert eval_q_mod(p % r, q % r, t % r, r) == eval_q_exact(p, q, t) % r


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(primes_between(2, 541)), st.data())
def test_evenness(r, data):
    p = data.draw(st.integers(0, r - 1))
    q = data.draw(st.integers(0, r - 1))
    t = data.draw(st.integers(0, r - 1))
    assert eval_q_mod(p, q, t, r) == eval_q_mod(p, q, (r - t) % r, r)


@pytest.mark.parametrize("lam", [1, 2, 3])
def test_homogeneity(lam):
    for p in range(1, 21, 3):
        for q in range(1, 21, 4):
            for t in range(0, 21, 5):
                assert eval_q_exact(lam * p, lam * q, lam**2 * t) == lam**20 * eval_q_exact(p, q, t)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_constant_term(p, q):
    assert eval_q_exact(p, q, 0) == -(p**10) * q**10


def test_weighted_homogeneity_of_coefficients():
    # coefficient of s^k scales by lambda^(20 - 4k) when p, q scale by lambda
    base = q_coefficients_exact(3, 7)
    scaled = q_coefficients_exact(6, 14)
    for k, (a, b) in enumerate(zip(reversed(base), reversed(scaled))):
        assert b == a * 2 ** (20 - 4 * k)


def test_is_prime():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
