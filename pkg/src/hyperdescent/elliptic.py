"""Elliptic curves y^2 = x(x^2 + a x + b): 2-isogeny descent, torsion and rank-0 point sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import f2
from . import poly as P
from .arith import Rational, divisors, factorize, legendre_symbol, residue, valuation

Point = Optional[tuple[Fraction, Fraction]]  # None is the point at infinity

_DEPTH_CAP = 40
_MAX_TORSION_ORDER = 12


@dataclass(frozen=True)
class EllCurve2T:
    """y^2 = X(X^2 + a X + b) with X = x + shift in the user's coordinate x."""

    a: Fraction
    b: Fraction
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("a", "b", "shift"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.b == 0 or self.a * self.a - 4 * self.b == 0:
            raise ValueError(f"singular curve a={self.a}, b={self.b}")

    def cubic(self) -> P.Poly:
        """Right-hand side in the user's coordinate x."""
        X = P.poly([self.shift, 1])
        return P.prod([X, P.add(P.mul(X, X), P.add(P.scale(X, self.a), (self.b,)))])

    def contains(self, pt: Point) -> bool:
        if pt is None:
            return True
        x, y = pt
        return y * y == P.evaluate(self.cubic(), x)

    def isogenous(self) -> "EllCurve2T":
        return EllCurve2T(-2 * self.a, self.a * self.a - 4 * self.b)

    def integral_scale(self) -> int:
        """Least lam > 0 with lam^2 a and lam^4 b integral."""
        lam = 1
        while (self.a * lam**2).denominator != 1 or (self.b * lam**4).denominator != 1:
            lam += 1
        return lam

    def integral_model(self) -> tuple["EllCurve2T", int]:
        lam = self.integral_scale()
        return EllCurve2T(self.a * lam**2, self.b * lam**4), lam

    def __str__(self) -> str:
        return f"y^2 = {P.to_str(self.cubic())} (a={self.a}, b={self.b}, shift={self.shift})"


# ---------------------------------------------------------------- group law


def add_points(E: EllCurve2T, P1: Point, P2: Point) -> Point:
    """Chord-and-tangent addition on the model in the user's coordinates."""
    if P1 is None:
        return P2
    if P2 is None:
        return P1
    c = E.cubic()
    a2, a4 = c[2], c[1]
    x1, y1 = P1
    x2, y2 = P2
    if x1 == x2:
        if y1 + y2 == 0:
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - a2 - x1 - x2
    return x3, -(y1 + lam * (x3 - x1))


def multiply(E: EllCurve2T, n: int, pt: Point) -> Point:
    out: Point = None
    for _ in range(n):
        out = add_points(E, out, pt)
    return out


def point_order(E: EllCurve2T, pt: Point, cap: int = _MAX_TORSION_ORDER) -> int | None:
    cur, n = pt, 1
    while cur is not None:
        if n >= cap:
            return None
        cur = add_points(E, cur, pt)
        n += 1
    return n


# ---------------------------------------------------------------- quartic -> cubic


@dataclass(frozen=True)
class QuarticModel:
    """t^2 = e z^4 + k z^2 + 1."""

    e: Fraction
    k: Fraction

    def contains(self, z: Fraction, t: Fraction) -> bool:
        return t * t == self.e * z**4 + self.k * z * z + 1


@dataclass(frozen=True)
class QuarticToCubic:
    quartic: QuarticModel
    curve: EllCurve2T

    def forward(self, z: Rational, t: Rational) -> Point:
        z, t = Fraction(z), Fraction(t)
        k = self.quartic.k
        if z == 0:
            return None if t == 1 else (-k, Fraction(0))
        return 2 * (t + 1) / z**2, (4 * (t + 1) + 2 * k * z * z) / z**3

    def backward(self, pt: Point) -> tuple[Fraction, Fraction] | str:
        """The quartic point (z, t), or 'inf+'/'inf-' for its points at infinity."""
        k = self.quartic.k
        if pt is None:
            return Fraction(0), Fraction(1)
        x, y = pt
        if x == -k and y == 0:
            return Fraction(0), Fraction(-1)
        if y == 0:
            return "inf+" if x > 0 else "inf-"
        z = 2 * (x + k) / y
        return z, x * z * z / 2 - 1


def quartic_to_cubic(e: Rational, k: Rational) -> QuarticToCubic:
    """t^2 = e z^4 + k z^2 + 1  ->  y^2 = x^3 + k x^2 - 4e x - 4ek = (x + k)(x^2 - 4e)."""
    e, k = Fraction(e), Fraction(k)
    if e == 0 or k * k == 4 * e:
        raise ValueError("singular quartic")
    # shift X = x + k puts the 2-torsion point (-k, 0) at the origin
    curve = EllCurve2T(-2 * k, k * k - 4 * e, shift=k)
    return QuarticToCubic(QuarticModel(e, k), curve)


# ---------------------------------------------------------------- local solvability


@dataclass(frozen=True)
class Torsor:
    """w^2 = d u^4 + a u^2 v^2 + (b/d) v^4."""

    d: int
    a: int
    b: int

    @property
    def e(self) -> int:
        return self.b // self.d

    def quartic(self) -> P.Poly:
        return P.poly([self.e, 0, self.a, 0, self.d])

    def reversed_quartic(self) -> P.Poly:
        return P.poly([self.d, 0, self.a, 0, self.e])


def _square_or_zero_decided(H: P.Poly, q: int) -> tuple[bool, bool]:
    """(decided, solvable) for the residue class parametrized by H(s), s in Z_q."""
    h0 = H[0] if H else Fraction(0)
    if h0 == 0:
        return True, True
    n = valuation(h0, q)
    rest = [valuation(c, q) for c in H[1:] if c != 0]
    m = min(rest) if rest else None
    need = 3 if q == 2 else 1
    if m is not None and n + need > m:
        return False, False
    if n % 2:
        return True, False
    u = h0 / Fraction(q) ** n
    if q == 2:
        return True, residue(u, 8) == 1
    return True, legendre_symbol(residue(u, q), q) == 1


def _class_solvable(G: P.Poly, q: int, t0: int, k: int, flags: list[str]) -> bool:
    # does t in t0 + q^k Z_q give G(t) in Q_q^2 or 0?
    H = P.compose(G, P.poly([t0, q**k]))
    decided, ok = _square_or_zero_decided(H, q)
    if decided:
        return ok
    if k >= _DEPTH_CAP:
        flags.append(f"depth cap at q={q}, class {t0} mod {q}^{k}")
        return True
    return any(_class_solvable(G, q, t0 + r * q**k, k + 1, flags) for r in range(q))


def locally_solvable(T: Torsor, q: int, flags: list[str] | None = None) -> bool:
    """Whether the torsor has a Q_q-point (q = 0 for the reals)."""
    flags = [] if flags is None else flags
    if q == 0:
        if T.d > 0 or T.e >= 0:
            return True
        return T.a > 0 and T.a * T.a >= 4 * T.b
    # primitive (u : v): either v = 1, u in Z_q; or u = 1, v in q Z_q
    if _class_solvable(T.quartic(), q, 0, 0, flags):
        return True
    return _class_solvable(T.reversed_quartic(), q, 0, 1, flags)


def squarefree_divisors(n: int) -> list[int]:
    """Signed squarefree divisors of n."""
    primes = factorize(n).primes()
    out = [1]
    for q in primes:
        out += [d * q for d in out]
    return sorted(out + [-d for d in out])


def _selmer_classes(a: int, b: int, flags: list[str]) -> list[int]:
    bad = {0} | set(factorize(2 * b * (a * a - 4 * b)).primes())
    out = []
    for d in squarefree_divisors(b):
        T = Torsor(d, a, b)
        if all(locally_solvable(T, q, flags) for q in sorted(bad)):
            out.append(d)
    return out


def _class_vector(d: int, primes: list[int]) -> int:
    bits = [int(d < 0)] + [int(d % q == 0) for q in primes]
    return f2.bits_to_int(bits)


def _closure_dim(classes: list[int], b: int, flags: list[str]) -> int:
    primes = factorize(b).primes()
    vecs = {_class_vector(d, primes) for d in classes}
    ech = f2.Echelon(list(vecs))
    if 2 ** len(ech) != len(vecs):
        flags.append("locally solvable classes are not closed under products; using the generated subgroup")
    return len(ech)


# ---------------------------------------------------------------- torsion


@dataclass(frozen=True)
class TorsionData:
    points: tuple[Point, ...]
    structure: str


def torsion_group(E: EllCurve2T) -> TorsionData:
    """Rational torsion by Lutz-Nagell on an integral model, verified with the group law."""
    Ei, lam = EllCurve2T(E.a, E.b).integral_model()
    cubic = Ei.cubic()
    A, B, C = (int(c) for c in (cubic[2], cubic[1], cubic[0]))
    disc = A * A * B * B - 4 * B**3 - 4 * A**3 * C - 27 * C * C + 18 * A * B * C
    cands: list[Point] = [(Fraction(x), Fraction(0)) for x in P.integer_roots(cubic)]
    root = 1
    for q, e in factorize(disc).factors:
        root *= q ** (e // 2)
    for y in divisors(root):
        for x in P.integer_roots(P.sub(cubic, (Fraction(y * y),))):
            cands += [(Fraction(x), Fraction(y)), (Fraction(x), Fraction(-y))]
    tors = [None] + [pt for pt in cands if point_order(Ei, pt) is not None]
    n = len(tors)
    two = sum(1 for pt in tors if pt is not None and pt[1] == 0)
    structure = "Z/2 x Z/%d" % (n // 2) if two == 3 else ("trivial" if n == 1 else f"Z/{n}")
    # back to the user's coordinates: X = x + shift, (X, Y) = (x_int / lam^2, y_int / lam^3)
    pts = tuple(
        None if pt is None else (pt[0] / lam**2 - E.shift, pt[1] / lam**3) for pt in tors
    )
    assert all(E.contains(pt) for pt in pts)
    return TorsionData(pts, structure)


# ---------------------------------------------------------------- certificates


@dataclass
class RankCertificate:
    curve: EllCurve2T
    selmer_classes: tuple[list[int], list[int]]
    selmer_dims: tuple[int, int]
    rank_bound: int
    torsion: TorsionData
    points: tuple[Point, ...] | None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "curve": str(self.curve),
            "selmer_classes": [list(map(str, c)) for c in self.selmer_classes],
            "selmer_dims": list(self.selmer_dims),
            "rank_bound": self.rank_bound,
            "torsion": self.torsion.structure,
            "points": None if self.points is None else [format_point(pt) for pt in self.points],
            "flags": list(self.flags),
        }


def rank_upper_bound(E: EllCurve2T) -> RankCertificate:
    """Rank bound dim Sel(phi) + dim Sel(phi') - 2 from 2-isogeny descent."""
    Ei, _ = EllCurve2T(E.a, E.b).integral_model()
    a, b = int(Ei.a), int(Ei.b)
    a2, b2 = -2 * a, a * a - 4 * b
    flags: list[str] = []
    s1 = _selmer_classes(a, b, flags)
    s2 = _selmer_classes(a2, b2, flags)
    d1, d2 = _closure_dim(s1, b, flags), _closure_dim(s2, b2, flags)
    bound = d1 + d2 - 2
    tors = torsion_group(E)
    pts = tors.points if bound == 0 else None
    return RankCertificate(E, (s1, s2), (d1, d2), bound, tors, pts, flags)


class RankNotZero(RuntimeError):
    pass


def rational_points_rank0(E: EllCurve2T) -> tuple[Point, ...]:
    cert = rank_upper_bound(E)
    if cert.rank_bound > 0:
        raise RankNotZero(f"rank bound {cert.rank_bound} is positive; cannot conclude for {E}")
    return cert.torsion.points


def format_point(pt: Point) -> str:
    return "inf" if pt is None else f"({pt[0]},{pt[1]})"
