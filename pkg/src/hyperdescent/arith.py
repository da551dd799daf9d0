"""Exact integer and rational arithmetic, plus local square tests at 2, odd p and infinity."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Union

Rational = Union[int, Fraction]

INF = 0
"""Place marker for the real place; finite places are given by their prime."""

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_LIMIT = 10**6


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_in_range(lo: int, hi: int) -> list[int]:
    return [n for n in range(max(lo, 2), hi + 1) if is_prime(n)]


def legendre_symbol(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p."""
    if p < 3 or p % 2 == 0:
        raise ValueError(f"legendre_symbol needs an odd prime, got {p}")
    if p < 10**4:
        assert is_prime(p), f"{p} is not prime"
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        c = rng.randrange(1, n)
        f = lambda x: (x * x + c) % n
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        out = self.sign
        for q, e in self.factors:
            out *= q**e
        return out

    def primes(self) -> list[int]:
        return [q for q, _ in self.factors]

    def __str__(self) -> str:
        body = "*".join(f"{q}^{e}" if e > 1 else str(q) for q, e in self.factors) or "1"
        return ("-" if self.sign < 0 else "") + body


def factorize(n: int) -> Factorization:
    """Complete factorization by trial division up to 1e6, then Pollard rho."""
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    n = abs(n)
    counts: dict[int, int] = {}
    q = 2
    while q * q <= n and q <= _TRIAL_LIMIT:
        while n % q == 0:
            counts[q] = counts.get(q, 0) + 1
            n //= q
        q += 1 if q == 2 else 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            counts[m] = counts.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.extend([d, m // d])
    return Factorization(sign, tuple(sorted(counts.items())))


def divisors(n: int) -> list[int]:
    """Positive divisors of n != 0, ascending."""
    out = [1]
    for q, e in factorize(n).factors:
        out = [d * q**k for d in out for k in range(e + 1)]
    return sorted(out)


def int_sqrt_exact(n: int) -> int | None:
    """Return r >= 0 with r*r == n, or None when n is not a perfect square."""
    if n < 0:
        raise ValueError("negative input")
    r = math.isqrt(n)
    return r if r * r == n else None


def rat_sqrt_exact(x: Rational) -> Fraction | None:
    x = Fraction(x)
    if x < 0:
        return None
    num, den = int_sqrt_exact(x.numerator), int_sqrt_exact(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def valuation(x: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def unit_part(x: Rational, p: int) -> tuple[int, Fraction]:
    """Split x = p^v * u with u a p-adic unit."""
    v = valuation(x, p)
    return v, Fraction(x) / Fraction(p) ** v


def residue(u: Rational, modulus: int) -> int:
    """Image of a rational with denominator prime to modulus in Z/modulus."""
    u = Fraction(u)
    return u.numerator * pow(u.denominator, -1, modulus) % modulus


def squarefree_part(x: Rational) -> int:
    """The squarefree integer s with x = s * (rational square)."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("squarefree part of 0")
    n = x.numerator * x.denominator
    out = -1 if n < 0 else 1
    for q, e in factorize(n).factors:
        if e % 2:
            out *= q
    return out


def is_rational_square(x: Rational) -> bool:
    return rat_sqrt_exact(x) is not None


def is_square_local(x: Rational, v: int) -> bool:
    """True iff the nonzero rational x is a square in Q_v (v = INF for the reals)."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero is excluded")
    if v == INF:
        return x > 0
    e, u = unit_part(x, v)
    if e % 2:
        return False
    if v == 2:
        return residue(u, 8) == 1
    return legendre_symbol(residue(u, v), v) == 1


@lru_cache(maxsize=None)
def least_nonresidue(p: int) -> int:
    for u in range(2, p):
        if legendre_symbol(u, p) == -1:
            return u
    raise ValueError(p)


def sqrt_mod_prime(a: int, p: int) -> int:
    """Tonelli-Shanks square root of a quadratic residue a modulo an odd prime p."""
    a %= p
    if a == 0:
        return 0
    if legendre_symbol(a, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = least_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def padic_sqrt(c: Rational, p: int, prec: int) -> Fraction:
    """An approximation r of a square root of c in Q_p with r^2 = c (1 + O(p^prec))."""
    e, u = unit_part(c, p)
    if e % 2 or not is_square_local(c, p):
        raise ValueError(f"{c} is not a square in Q_{p}")
    modulus = p**prec
    u_int = residue(u, modulus)
    if p == 2:
        r = 1
        for k in range(3, prec):
            if (r * r - u_int) % (1 << (k + 1)):
                r += 1 << (k - 1)
        r %= modulus
    else:
        r = sqrt_mod_prime(u_int, p)
        k = 1
        while k < prec:
            k = min(2 * k, prec)
            mk = p**k
            r = (r - (r * r - u_int) * pow(2 * r, -1, mk)) % mk
    return Fraction(r) * Fraction(p) ** (e // 2)


def iter_coprime_pairs(bound: int) -> Iterator[tuple[int, int]]:
    """All (U, W) with W >= 1, |U|, W <= bound and gcd(U, W) = 1."""
    for w in range(1, bound + 1):
        for u in range(-bound, bound + 1):
            if math.gcd(u, w) == 1:
                yield u, w
