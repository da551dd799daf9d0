"""Square classes of Q_v and of Q_v[T]/(T^2 - c) as F2-vectors in frozen bases.

A place is an int: a prime, or ``INF`` (= 0) for the reals.

Basis conventions (coordinates are listed in this order):

* reals: {-1}
* Q_p, p odd: {u0, p} with u0 the least quadratic non-residue
* Q_2: {-1, 2, 5}
* split algebra Q_v x Q_v: the Q_v basis twice, first for the image under T -> r
  and then for T -> -r (r the positive root at infinity)
* quadratic field over Q_p, p odd: {non-square unit, uniformizer}
* quadratic field over Q_2: three unit generators picked greedily from a fixed
  candidate list, then the uniformizer
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from . import f2
from .arith import (
    INF,
    Rational,
    is_prime,
    is_square_local,
    least_nonresidue,
    legendre_symbol,
    padic_sqrt,
    residue,
    unit_part,
    valuation,
)
from .quadfield import QuadElt, real_sign

SPLIT, UNRAMIFIED, RAMIFIED, COMPLEX = "split", "unramified", "ramified", "complex"


def check_place(v: int) -> int:
    if v != INF and not is_prime(v):
        raise ValueError(f"{v} is not a place of Q")
    return v


def place_name(v: int) -> str:
    return "inf" if v == INF else str(v)


def rational_dim(v: int) -> int:
    return 1 if v == INF else (3 if v == 2 else 2)


def rational_class(x: Rational, v: int) -> tuple[int, ...]:
    """Coordinates of x in Q_v^x / Q_v^x2."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    if v == INF:
        return (int(x < 0),)
    e, u = unit_part(x, v)
    if v == 2:
        r = residue(u, 8)
        return (int(r % 4 == 3), e % 2, int(r in (3, 5)))
    return (int(legendre_symbol(residue(u, v), v) == -1), e % 2)


def rational_basis(v: int) -> tuple[Fraction, ...]:
    if v == INF:
        return (Fraction(-1),)
    if v == 2:
        return (Fraction(-1), Fraction(2), Fraction(5))
    return (Fraction(least_nonresidue(v)), Fraction(v))


# ---------------------------------------------------------------- algebras


@dataclass(frozen=True)
class LocalQuadAlgebra:
    """Q_v[T]/(T^2 - c). ``c0`` is c divided by an even power of v (v finite)."""

    v: int
    c: int
    shape: str
    scale: Fraction = Fraction(1)  # sqrt(c) = scale * sqrt(c0)
    c0: int = 0

    @property
    def dim(self) -> int:
        if self.shape == SPLIT:
            return 2 * rational_dim(self.v)
        if self.shape == COMPLEX:
            return 0
        return 4 if self.v == 2 else 2


def decompose(c: int, v: int) -> LocalQuadAlgebra:
    """Shape of Q_v[T]/(T^2 - c)."""
    check_place(v)
    if c == 0:
        raise ValueError("c must be nonzero")
    if v == INF:
        return LocalQuadAlgebra(v, c, SPLIT if c > 0 else COMPLEX, Fraction(1), c)
    if is_square_local(c, v):
        return LocalQuadAlgebra(v, c, SPLIT, Fraction(1), c)
    e = valuation(c, v)
    m = e // 2
    c0 = c // v ** (2 * m)
    scale = Fraction(v) ** m
    if v == 2:
        shape = UNRAMIFIED if (c0 % 2 and c0 % 8 == 5) else RAMIFIED
    else:
        shape = RAMIFIED if e % 2 else UNRAMIFIED
    return LocalQuadAlgebra(v, c, shape, scale, c0)


# ---------------------------------------------------------------- split case

_SPLIT_PREC = 60


@lru_cache(maxsize=None)
def _padic_root(c: int, v: int, prec: int) -> Fraction:
    return padic_sqrt(c, v, prec)


def _split_images(x: QuadElt, A: LocalQuadAlgebra) -> tuple[Fraction, Fraction] | None:
    """(a + b r, a - b r) as rationals p-adically close enough to decide square classes."""
    a, b = x.a, x.b
    if b == 0:
        return a, a
    prec = _SPLIT_PREC
    while prec < 4000:
        r = _padic_root(A.c, A.v, prec)
        vals = (a + b * r, a - b * r)
        # the approximation error has valuation >= v(b) + prec - (denominator of r)
        err = valuation(b, A.v) + prec - 1
        if all(w != 0 and valuation(w, A.v) + 4 <= err for w in vals):
            return vals
        prec *= 2
    return None


def split_class(x: QuadElt, A: LocalQuadAlgebra) -> tuple[int, ...]:
    if A.v == INF:
        plus = real_sign(x.a, x.b, A.c)
        minus = real_sign(x.a, -x.b, A.c)
        if plus == 0 or minus == 0:
            raise ValueError(f"{x} is a zero divisor")
        return (int(plus < 0), int(minus < 0))
    images = _split_images(x, A)
    if images is None:
        raise ValueError(f"{x} is a zero divisor in the split algebra over Q_{A.v}")
    return rational_class(images[0], A.v) + rational_class(images[1], A.v)


# ---------------------------------------------------------------- odd p fields


def _odd_field_class(x: QuadElt, A: LocalQuadAlgebra) -> tuple[int, int]:
    p = A.v
    a, b = x.a, x.b * A.scale  # x = a + b sqrt(c0)
    if A.shape == UNRAMIFIED:
        k = min(valuation(t, p) for t in (a, b) if t != 0)
        n = (a * a - A.c0 * b * b) / Fraction(p) ** (2 * k)
        return int(legendre_symbol(residue(n, p), p) == -1), k % 2
    # ramified: pi = sqrt(c0), v_K(a) = 2 v(a), v_K(b pi) = 2 v(b) + 1
    vk = min(w for w in (2 * valuation(a, p) if a else None, 2 * valuation(b, p) + 1 if b else None) if w is not None)
    m = vk // 2
    a, b = a / Fraction(A.c0) ** m, b / Fraction(A.c0) ** m
    if vk % 2:
        a, b = b, a / A.c0  # divide by pi
    return int(legendre_symbol(residue(a, p), p) == -1), vk % 2


# ---------------------------------------------------------------- 2-adic fields


@dataclass(frozen=True)
class _TwoAdicField:
    c0: int
    shape: str
    sigma: int          # omega = (sigma + sqrt c0)/2 when sigma = 1, else sqrt c0
    squares: frozenset  # unit squares modulo 8 O_K as (s, t) pairs
    basis: tuple        # unit basis as (s, t) residues mod 8
    uniformizer: tuple[Fraction, Fraction]  # as (a, b) with a + b sqrt c0


def _omega_coords(a: Fraction, b: Fraction, sigma: int) -> tuple[Fraction, Fraction]:
    return (a - b, 2 * b) if sigma else (a, b)


def _mul8(x, y, sigma: int, c0: int):
    # (s1 + t1 w)(s2 + t2 w) with w^2 = sigma w + n
    n = (c0 - 1) // 4 if sigma else c0
    s1, t1 = x
    s2, t2 = y
    tt = t1 * t2
    return ((s1 * s2 + tt * n) % 8, (s1 * t2 + t1 * s2 + tt * sigma) % 8)


def _is_unit8(x, sigma: int, c0: int) -> bool:
    s, t = x
    n = (c0 - 1) // 4 if sigma else c0
    norm = s * s + sigma * s * t - n * t * t
    return norm % 2 == 1


@lru_cache(maxsize=None)
def _two_adic_field(c0: int) -> _TwoAdicField:
    c0m = c0 % 64 if c0 % 2 else c0 % 128  # only c0 mod 32 matters for the ring mod 8
    if c0 % 8 == 5:
        shape, sigma, pi = UNRAMIFIED, 1, (Fraction(2), Fraction(0))
    elif c0 % 4 == 3:
        shape, sigma, pi = RAMIFIED, 0, (Fraction(1), Fraction(1))
    else:
        shape, sigma, pi = RAMIFIED, 0, (Fraction(0), Fraction(1))
    units = [(s, t) for s in range(8) for t in range(8) if _is_unit8((s, t), sigma, c0m)]
    squares = frozenset(_mul8(u, u, sigma, c0m) for u in units)
    # subgroup generated by squares is the set of squares itself
    candidates = [(7, 0), (5, 0), (3, 0), (1, 2), (1, 4), (1, 6), (3, 2), (1, 1), (0, 1), (1, 3)]
    candidates += [u for u in units if u not in candidates]
    basis: list = []
    span = set(squares)
    for cand in candidates:
        if cand not in units or cand in span:
            continue
        basis.append(cand)
        span |= {_mul8(cand, s, sigma, c0m) for s in span}
        if len(basis) == 3:
            break
    assert len(basis) == 3, (c0, basis)
    return _TwoAdicField(c0m, shape, sigma, squares, tuple(basis), pi)


def _two_field_class(x: QuadElt, A: LocalQuadAlgebra) -> tuple[int, ...]:
    F = _two_adic_field(A.c0)
    a, b = x.a, x.b * A.scale
    norm = a * a - A.c0 * b * b
    vn = valuation(norm, 2)
    if F.shape == UNRAMIFIED:
        k = vn // 2
        a, b = a / Fraction(2) ** k, b / Fraction(2) ** k
    else:
        k = vn
        pa, pb = F.uniformizer
        pnorm = pa * pa - A.c0 * pb * pb
        if k < 0:  # multiply by pi
            for _ in range(-k):
                a, b = a * pa + A.c0 * b * pb, a * pb + b * pa
        for _ in range(k):  # divide by pi
            a, b = (a * pa - A.c0 * b * pb) / pnorm, (b * pa - a * pb) / pnorm
    s, t = _omega_coords(a, b, F.sigma)
    u = (residue(s, 8), residue(t, 8))
    for bits in product((0, 1), repeat=3):
        y = u
        for g, e in zip(F.basis, bits):
            if e:
                y = _mul8(y, g, F.sigma, F.c0)
        if y in F.squares:
            return bits + (k % 2,)
    raise AssertionError("unit square class not found")


def two_adic_unit_basis(c0: int) -> list[QuadElt]:
    """The frozen unit basis of Q_2(sqrt c0) as global elements a + b sqrt(c0)."""
    F = _two_adic_field(c0)
    out = []
    for s, t in F.basis:
        if F.sigma:
            out.append(QuadElt(c0, Fraction(s) + Fraction(t, 2), Fraction(t, 2)))
        else:
            out.append(QuadElt(c0, s, t))
    return out


# ---------------------------------------------------------------- public


def square_class(x, A: LocalQuadAlgebra) -> tuple[int, ...]:
    """F2 coordinates of x (a QuadElt with d = A.c) in the component algebra A."""
    if not isinstance(x, QuadElt):
        x = QuadElt(A.c, Fraction(x))
    if x.is_zero():
        raise ValueError("zero has no square class")
    if x.d != A.c:
        raise ValueError(f"element of Q(sqrt {x.d}) given for T^2 = {A.c}")
    if A.shape == SPLIT:
        return split_class(x, A)
    if A.shape == COMPLEX:
        return ()
    if A.v == 2:
        return _two_field_class(x, A)
    return _odd_field_class(x, A)


@dataclass(frozen=True)
class LocalEtale:
    """L_v = Q_v x Q_v[T2]/(T2^2 - c2) x Q_v[T3]/(T3^2 - c3)."""

    v: int
    c2: int
    c3: int

    @property
    def components(self) -> tuple[LocalQuadAlgebra, LocalQuadAlgebra]:
        return decompose(self.c2, self.v), decompose(self.c3, self.v)

    @property
    def dims(self) -> tuple[int, int, int]:
        A2, A3 = self.components
        return rational_dim(self.v), A2.dim, A3.dim

    @property
    def dim(self) -> int:
        return sum(self.dims)


def embed_global(alpha: Sequence, E: LocalEtale) -> tuple[int, ...]:
    """res_v of a triple (rational, element over c2, element over c3) as one coordinate tuple."""
    q, x2, x3 = alpha
    A2, A3 = E.components
    return rational_class(q, E.v) + square_class(x2, A2) + square_class(x3, A3)


def embed_global_int(alpha: Sequence, E: LocalEtale) -> int:
    return f2.bits_to_int(embed_global(alpha, E))
