"""Exact verification of (p, q) pairs that get through the sieve.

Positive integer roots t of Q_pq are found by locating the positive integer
roots s of the quintic in s = t**2: a Sturm chain of the square-free part
isolates each real root, then plain sign-change bisection on integers pins it
down.  Everything is exact integer/rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence

from .modpoly import horner, q_coefficients_exact


@dataclass(frozen=True)
class SievedOut:
    prime: int

    def describe(self) -> str:
        return f"sieved out by r={self.prime}"


@dataclass(frozen=True)
class NoIntegerRoot:
    def describe(self) -> str:
        return "no integer root"


@dataclass(frozen=True)
class RootFailsInequalities:
    t: int

    def describe(self) -> str:
        return f"integer root t={self.t} fails the cuboid inequalities"


@dataclass(frozen=True)
class CuboidCandidate:
    t: int

    def describe(self) -> str:
        return f"CUBOID CANDIDATE t={self.t}"


PairVerdict = SievedOut | NoIntegerRoot | RootFailsInequalities | CuboidCandidate


# --- dense polynomial helpers, coefficients highest degree first -------------


def _strip(f: list) -> list:
    i = 0
    while i < len(f) - 1 and f[i] == 0:
        i += 1
    return f[i:]


def _derivative(f: Sequence) -> list:
    n = len(f) - 1
    return _strip([c * (n - i) for i, c in enumerate(f[:-1])]) or [0]


def _rem(f: list, g: list) -> list:
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    while len(f) >= len(g) and any(f):
        k = f[0] / g[0]
        for i in range(len(g)):
            f[i] -= k * g[i]
        f = f[1:]
    return _strip(f) if f else [Fraction(0)]


def _div(f: list, g: list) -> list:
    f = [Fraction(c) for c in f]
    out = []
    while len(f) >= len(g):
        k = f[0] / g[0]
        out.append(k)
        for i in range(len(g)):
            f[i] -= k * g[i]
        f = f[1:]
    return out


def _gcd(f: list, g: list) -> list:
    while any(g):
        f, g = g, _rem(f, g)
    return f


def _to_integer(f: Sequence) -> list[int]:
    """Positive rational multiple of f with coprime integer coefficients."""
    f = [Fraction(c) for c in f]
    den = 1
    for c in f:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in f]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return [c // g for c in ints] if g > 1 else ints


def squarefree_part(f: Sequence[int]) -> list[int]:
    f = _strip(list(f))
    if len(f) <= 1:
        return list(f)
    d = _gcd(f, _derivative(f))
    if len(d) == 1:
        return _to_integer(f)
    return _to_integer(_div(f, d))


def sturm_chain(f: Sequence[int]) -> list[list[int]]:
    chain = [list(f), _derivative(f)]
    while len(chain[-1]) > 1:
        r = _rem(chain[-2], chain[-1])
        if not any(r):
            break
        chain.append(_to_integer([-c for c in r]))
    return chain


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _variations(chain: list[list[int]], x: int) -> int:
    n = 0
    last = 0
    for f in chain:
        s = _sign(horner(f, x))
        if s:
            if last and s != last:
                n += 1
            last = s
    return n


def _split_point(lo: int, hi: int) -> int:
    # Geometric midpoint while the interval spans many octaves.
    if lo > 0 and hi > 4 * lo:
        mid = isqrt(lo * hi)
    else:
        mid = (lo + hi) // 2
    return min(max(mid, lo + 1), hi - 1)


def _pin_single_root(g: list[int], lo: int, hi: int) -> int | None:
    """g has exactly one simple root in (lo, hi]; return it if it is an integer."""
    g_hi = horner(g, hi)
    if g_hi == 0:
        return hi
    s_hi = _sign(g_hi)
    while hi - lo > 1:
        mid = _split_point(lo, hi)
        g_mid = horner(g, mid)
        if g_mid == 0:
            return mid
        if _sign(g_mid) == s_hi:
            hi = mid
        else:
            lo = mid
    return None


def positive_integer_roots(coeffs: Sequence[int]) -> list[int]:
    """All distinct positive integer roots of an integer polynomial, ascending."""
    f = _strip([int(c) for c in coeffs])
    if len(f) <= 1:
        if f and f[0] == 0:
            raise ValueError("zero polynomial has every integer as a root")
        return []
    g = squarefree_part(f)
    if g[0] < 0:
        g = [-c for c in g]
    chain = sturm_chain(g)
    bound = 2 + max(abs(c) for c in g[1:]) // abs(g[0])
    roots: list[int] = []
    stack = [(0, bound, _variations(chain, 0), _variations(chain, bound))]
    while stack:
        lo, hi, v_lo, v_hi = stack.pop()
        count = v_lo - v_hi
        if count == 0:
            continue
        if count == 1:
            root = _pin_single_root(g, lo, hi)
            if root is not None:
                roots.append(root)
            continue
        if hi - lo == 1:
            # several roots in (lo, hi] but at most hi is an integer
            if horner(g, hi) == 0:
                roots.append(hi)
            continue
        mid = _split_point(lo, hi)
        v_mid = _variations(chain, mid)
        stack.append((lo, mid, v_lo, v_mid))
        stack.append((mid, hi, v_mid, v_hi))
    roots.sort()
    assert all(horner(f, s) == 0 for s in roots)
    return roots


def satisfies_cuboid_inequalities(p: int, q: int, t: int) -> bool:
    return t > p * p and t > p * q and t > q * q and (p * p + t) * (p * q + t) > 2 * t * t


def integer_roots_t(p: int, q: int) -> list[int]:
    """Positive integer t with Q_pq(t) == 0."""
    out = []
    for s in positive_integer_roots(q_coefficients_exact(p, q)):
        t = isqrt(s)
        if t * t == s:
            out.append(t)
    return out


def check_pair(p: int, q: int) -> None:
    if p < 1 or q < 1:
        raise ValueError(f"p and q must be positive, got ({p}, {q})")
    if p == q:
        raise ValueError(f"p and q must differ, got p = q = {p}")
    if gcd(p, q) != 1:
        raise ValueError(f"p and q must be coprime, gcd({p}, {q}) = {gcd(p, q)}")


def first_killing_prime(sieve, p: int, q: int) -> int | None:
    for rank, r in enumerate(sieve.primes):
        if sieve.is_unsolvable(rank, p, q):
            return r
    return None


def verify_pair(p: int, q: int, sieve=None, bypass_sieve: bool = False) -> PairVerdict:
    """Classify a coprime pair p != q.

    Unless ``bypass_sieve`` is set, the sieve is consulted first and the
    smallest rejecting prime is reported.  Otherwise the exact root search
    decides.
    """
    check_pair(p, q)
    if not bypass_sieve:
        if sieve is None:
            raise ValueError("a sieve set is required unless bypass_sieve is set")
        r = first_killing_prime(sieve, p, q)
        if r is not None:
            return SievedOut(r)
    roots = integer_roots_t(p, q)
    for t in roots:
        if satisfies_cuboid_inequalities(p, q, t):
            return CuboidCandidate(t)
    if roots:
        return RootFailsInequalities(roots[0])
    return NoIntegerRoot()
