"""Dense univariate polynomials over Q, stored as ascending coefficient tuples."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .arith import divisors

Poly = tuple[Fraction, ...]


def poly(coeffs: Iterable) -> Poly:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


X: Poly = (Fraction(0), Fraction(1))
ONE: Poly = (Fraction(1),)


def degree(f: Poly) -> int:
    return len(f) - 1


def add(f: Poly, g: Poly) -> Poly:
    n = max(len(f), len(g))
    return poly((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n))


def neg(f: Poly) -> Poly:
    return tuple(-c for c in f)


def sub(f: Poly, g: Poly) -> Poly:
    return add(f, neg(g))


def scale(f: Poly, c) -> Poly:
    return poly(c * a for a in f)


def mul(f: Poly, g: Poly) -> Poly:
    if not f or not g:
        return ()
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return poly(out)


def prod(polys: Iterable[Poly]) -> Poly:
    out = ONE
    for f in polys:
        out = mul(out, f)
    return out


def power(f: Poly, n: int) -> Poly:
    return prod([f] * n)


def deriv(f: Poly) -> Poly:
    return poly(i * c for i, c in enumerate(f) if i)


def evaluate(f: Sequence, x):
    """Horner evaluation; x may be any ring element supporting + and *."""
    acc = 0
    for c in reversed(f):
        acc = acc * x + c
    return acc


def divmod_poly(f: Poly, g: Poly) -> tuple[Poly, Poly]:
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(f)
    q = [Fraction(0)] * max(len(f) - len(g) + 1, 1)
    lead = g[-1]
    while len(rem) >= len(g) and any(rem):
        shift = len(rem) - len(g)
        c = rem[-1] / lead
        q[shift] = c
        for i, b in enumerate(g):
            rem[shift + i] -= c * b
        rem.pop()
        while rem and rem[-1] == 0:
            rem.pop()
    return poly(q), poly(rem)


def compose(f: Poly, g: Poly) -> Poly:
    out: Poly = ()
    for c in reversed(f):
        out = add(mul(out, g), (c,))
    return out


def resultant(f: Poly, g: Poly) -> Fraction:
    """Res(f, g) by the Euclidean algorithm over Q."""
    if not f or not g:
        return Fraction(0)
    m, n = degree(f), degree(g)
    if n == 0:
        return g[0] ** m
    if m < n:
        sign = -1 if (m * n) % 2 else 1
        return sign * resultant(g, f)
    _, r = divmod_poly(f, g)
    if not r:
        return Fraction(0)
    k = degree(r)
    sign = -1 if (m * n) % 2 else 1
    return sign * g[-1] ** (m - k) * resultant(g, r)


def discriminant(f: Poly) -> Fraction:
    n = degree(f)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(f, deriv(f)) / f[-1]


def integer_roots(f: Poly) -> list[int]:
    """All integer roots of a nonzero polynomial with rational coefficients."""
    if not f:
        raise ValueError("zero polynomial")
    den = 1
    for c in f:
        den = den * c.denominator // _gcd(den, c.denominator)
    g = [int(c * den) for c in f]
    roots: list[int] = []
    while g and g[0] == 0:
        if 0 not in roots:
            roots.append(0)
        g = g[1:]
    if len(g) <= 1:
        return sorted(roots)
    for d in divisors(g[0]):
        for cand in (d, -d):
            if evaluate(g, cand) == 0:
                roots.append(cand)
    return sorted(roots)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def to_str(f: Poly) -> str:
    return "[" + ", ".join(str(c) for c in f) + "]"


def to_expr(f: Poly, var: str = "x") -> str:
    """Human-readable form, highest degree first: x^5 - 39x^3 + 338x."""
    terms = []
    for k in range(len(f) - 1, -1, -1):
        c = f[k]
        if c == 0:
            continue
        mag = abs(c)
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        coef = str(mag) if (mag != 1 or k == 0) else ""
        terms.append(("-" if c < 0 else "+", coef + mono))
    if not terms:
        return "0"
    head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    return head + "".join(f" {s} {t}" for s, t in terms[1:])
