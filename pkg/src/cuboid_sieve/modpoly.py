"""Exact and modular evaluation of the degree-10 cuboid polynomial Q_pq(t).

Q_pq is even in t, so everything here works with the quintic in s = t**2::

    Q_pq(t) = s**5 + c4*s**4 + c3*s**3 + c2*s**2 + c1*s + c0
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

MAX_MODULUS = 9697


class SearchPair(NamedTuple):
    p: int
    q: int


class ExactCoefficients(NamedTuple):
    """Coefficients of Q_pq as a quintic in s = t**2, leading first."""

    c5: int
    c4: int
    c3: int
    c2: int
    c1: int
    c0: int


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_modulus(r: int) -> None:
    if not isinstance(r, (int, np.integer)) or not 2 <= r < MAX_MODULUS:
        raise ValueError(f"modulus must be an integer in [2, {MAX_MODULUS}), got {r!r}")
    if not is_prime(int(r)):
        raise ValueError(f"modulus {r} is not prime")


def q_coefficients_exact(p: int, q: int) -> ExactCoefficients:
    """Return the six exact coefficients of Q_pq in s = t**2.

    ``p == q`` is allowed here; only positivity is enforced.
    """
    p, q = int(p), int(q)
    if p < 1 or q < 1:
        raise ValueError(f"p and q must be positive, got p={p}, q={q}")
    p2, q2 = p * p, q * q
    p4, q4 = p2 * p2, q2 * q2
    p6, q6 = p4 * p2, q4 * q2
    p8, q8 = p4 * p4, q4 * q4
    return ExactCoefficients(
        1,
        (2 * q2 + p2) * (3 * q2 - 2 * p2),
        q8 + 10 * p2 * q6 + 4 * p4 * q4 - 14 * p6 * q2 + p8,
        -p2 * q2 * (q8 - 14 * p2 * q6 + 4 * p4 * q4 + 10 * p6 * q2 + p8),
        -p6 * q6 * (q2 + 2 * p2) * (3 * p2 - 2 * q2),
        -(q8 * q2) * (p8 * p2),
    )


def horner(coeffs, x: int) -> int:
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def eval_q_exact(p: int, q: int, t: int) -> int:
    if t < 0:
        raise ValueError("t must be non-negative")
    return horner(q_coefficients_exact(p, q), int(t) * int(t))


def _coefficients_mod(p: int, q: int, r: int) -> tuple[int, int, int, int, int, int]:
    # Products only ever combine reduced factors, so nothing exceeds r**2 < 2**32.
    p2 = p * p % r
    q2 = q * q % r
    p4 = p2 * p2 % r
    q4 = q2 * q2 % r
    p6 = p4 * p2 % r
    q6 = q4 * q2 % r
    p8 = p4 * p4 % r
    q8 = q4 * q4 % r
    p2q2 = p2 * q2 % r
    p4q4 = p4 * q4 % r
    p2q6 = p2 * q6 % r
    p6q2 = p6 * q2 % r

    c4 = (2 * q2 + p2) % r * ((3 * q2 + 2 * (r - p2)) % r) % r
    c3 = (q8 + 10 * p2q6 + 4 * p4q4 + 14 * (r - p6q2) + p8) % r
    inner = (q8 + 14 * (r - p2q6) + 4 * p4q4 + 10 * p6q2 + p8) % r
    c2 = (r - p2q2 * inner % r) % r
    p6q6 = p6 * q6 % r
    c1 = (r - p6q6 * ((q2 + 2 * p2) % r) % r * ((3 * p2 + 2 * (r - q2)) % r) % r) % r
    c0 = (r - p8 * p2 % r * (q8 * q2 % r) % r) % r
    return 1, c4, c3, c2, c1, c0


def eval_q_mod(p: int, q: int, t: int, r: int) -> int:
    """Q_pq(t) mod r for residues p, q, t in [0, r), result in [0, r)."""
    check_modulus(r)
    for name, v in (("p", p), ("q", q), ("t", t)):
        if not 0 <= v < r:
            raise ValueError(f"residue {name}={v} outside [0, {r})")
    s = t * t % r
    acc = 0
    for c in _coefficients_mod(p, q, r):
        acc = (acc * s + c) % r
    return acc


def coefficients_mod_array(p: int, q: np.ndarray, r: int) -> list[np.ndarray]:
    """Coefficient residues for a fixed p residue and an array of q residues."""
    q = np.asarray(q, dtype=np.int64)
    p2 = p * p % r
    p4 = p2 * p2 % r
    p6 = p4 * p2 % r
    p8 = p4 * p4 % r
    q2 = q * q % r
    q4 = q2 * q2 % r
    q6 = q4 * q2 % r
    q8 = q4 * q4 % r
    c4 = (2 * q2 + p2) % r * ((3 * q2 + 2 * (r - p2)) % r) % r
    c3 = (q8 + 10 * (p2 * q6 % r) + 4 * (p4 * q4 % r) + 14 * (r - p6 * q2 % r) + p8) % r
    inner = (q8 + 14 * (r - p2 * q6 % r) + 4 * (p4 * q4 % r) + 10 * (p6 * q2 % r) + p8) % r
    c2 = (r - (p2 * q2 % r) * inner % r) % r
    c1 = (r - (p6 * q6 % r) * ((q2 + 2 * p2) % r) % r * ((3 * p2 + 2 * (r - q2)) % r) % r) % r
    c0 = (r - (p8 * p2 % r) * (q8 * q2 % r) % r) % r
    one = np.ones_like(q)
    return [one, c4, c3, c2, c1, c0]
