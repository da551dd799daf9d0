"""Hyperelliptic curves y^2 = f(x), the 2^i p^j family, Richelot isogenies and point searches."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import poly as P
from .arith import Rational, divisors, factorize, int_sqrt_exact, is_rational_square, rat_sqrt_exact


@dataclass(frozen=True, order=True)
class CurvePoint:
    """An affine point, or a point at infinity (``inf`` is '', '+', '-' for the marker's branch)."""

    x: Fraction | None = None
    y: Fraction | None = None
    inf: str | None = None

    @classmethod
    def affine(cls, x: Rational, y: Rational) -> "CurvePoint":
        return cls(Fraction(x), Fraction(y), None)

    @classmethod
    def infinity(cls, branch: str = "") -> "CurvePoint":
        return cls(None, None, branch)

    @property
    def is_infinity(self) -> bool:
        return self.inf is not None

    def __str__(self) -> str:
        if self.is_infinity:
            return "inf" + self.inf
        return f"({self.x},{self.y})"

    @classmethod
    def parse(cls, text: str) -> "CurvePoint":
        text = text.strip()
        if text.startswith("inf"):
            return cls.infinity(text[3:])
        x, y = text.strip("()").split(",")
        return cls.affine(Fraction(x), Fraction(y))

    def sort_key(self):
        return (0, "", 0) if self.is_infinity and not self.inf else (
            (0, self.inf, 0) if self.is_infinity else (1, self.x, self.y))


def sort_points(points: Iterable[CurvePoint]) -> list[CurvePoint]:
    return sorted(set(points), key=CurvePoint.sort_key)


@dataclass(frozen=True)
class HyperCurve:
    """y^2 = f(x) with deg f in {5, 6} and f squarefree."""

    f: P.Poly
    tag: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "f", P.poly(self.f))
        if P.degree(self.f) not in (5, 6):
            raise ValueError(f"degree must be 5 or 6, got {P.degree(self.f)}")
        if self.discriminant() == 0:
            raise ValueError("singular curve: f has a repeated root")

    @property
    def degree(self) -> int:
        return P.degree(self.f)

    def discriminant(self) -> Fraction:
        return P.discriminant(self.f)

    def __call__(self, x: Rational) -> Fraction:
        return P.evaluate(self.f, Fraction(x))

    def contains(self, pt: CurvePoint) -> bool:
        if pt.is_infinity:
            if self.degree == 5:
                return pt.inf == ""
            return pt.inf in ("+", "-") and is_rational_square(self.f[-1])
        return pt.y * pt.y == self(pt.x)

    def points_at_infinity(self) -> list[CurvePoint]:
        if self.degree == 5:
            return [CurvePoint.infinity()]
        if is_rational_square(self.f[-1]):
            return [CurvePoint.infinity("+"), CurvePoint.infinity("-")]
        return []

    def serialize(self) -> str:
        return P.to_str(self.f)

    @classmethod
    def deserialize(cls, text: str, tag: str = "custom") -> "HyperCurve":
        body = text.strip().strip("[]")
        return cls(tuple(Fraction(c.strip()) for c in body.split(",")), tag)

    def __str__(self) -> str:
        return f"y^2 = {self.serialize()} ({self.tag})"


def family_poly(A: Rational, B: Rational) -> P.Poly:
    """x(x^2 + A)(x^2 + B)."""
    return P.prod([P.X, P.poly([A, 0, 1]), P.poly([B, 0, 1])])


def family_curve(p: int, i: int, j: int) -> HyperCurve:
    """C^(p;i,j): y^2 = x(x^2 + 2^i p^j)(x^2 + 2^(i+1) p^j)."""
    A = Fraction(2) ** i * Fraction(p) ** j
    return HyperCurve(family_poly(A, 2 * A), f"family({p},{i},{j})")


# ---------------------------------------------------------------- normalization


@dataclass(frozen=True)
class MonomialMap:
    """(x, y) -> (2^a2 p^ap x^s, 2^b2 p^bp y x^t), with (s, t) = (1, 0) or (-1, -3)."""

    a2: int = 0
    ap: int = 0
    s: int = 1
    b2: int = 0
    bp: int = 0
    t: int = 0

    def alpha(self, p: int) -> Fraction:
        return Fraction(2) ** self.a2 * Fraction(p) ** self.ap

    def beta(self, p: int) -> Fraction:
        return Fraction(2) ** self.b2 * Fraction(p) ** self.bp

    def then(self, other: "MonomialMap") -> "MonomialMap":
        """Apply self, then other."""
        return MonomialMap(
            a2=other.a2 + other.s * self.a2,
            ap=other.ap + other.s * self.ap,
            s=self.s * other.s,
            b2=other.b2 + self.b2 + other.t * self.a2,
            bp=other.bp + self.bp + other.t * self.ap,
            t=self.t + self.s * other.t,
        )

    def inverse(self) -> "MonomialMap":
        if self.s == 1:
            return MonomialMap(-self.a2, -self.ap, 1, -self.b2, -self.bp, 0)
        return MonomialMap(self.a2, self.ap, -1, 3 * self.a2 - self.b2, 3 * self.ap - self.bp, -3)

    def apply(self, pt: CurvePoint, p: int) -> CurvePoint:
        al, be = self.alpha(p), self.beta(p)
        if self.s == 1:
            if pt.is_infinity:
                return pt
            return CurvePoint.affine(al * pt.x, be * pt.y)
        if pt.is_infinity:
            return CurvePoint.affine(0, 0)
        if pt.x == 0:
            return CurvePoint.infinity()
        return CurvePoint.affine(al / pt.x, be * pt.y / pt.x**3)

    def is_identity(self) -> bool:
        return self == MonomialMap()

    def describe(self) -> str:
        def mono(two, pp):
            parts = []
            if two:
                parts.append(f"2^{two}")
            if pp:
                parts.append(f"p^{pp}")
            return "*".join(parts) or "1"

        if self.s == 1:
            return f"(x, y) -> ({mono(self.a2, self.ap)}*x, {mono(self.b2, self.bp)}*y)"
        return f"(x, y) -> ({mono(self.a2, self.ap)}/x, {mono(self.b2, self.bp)}*y/x^3)"


def verify_monomial_map(src: HyperCurve, tgt: HyperCurve, m: MonomialMap, p: int) -> bool:
    """Exact check that m sends src to tgt: beta^2 x^(2t) f_src(x) = f_tgt(alpha x^s)."""
    al, be = m.alpha(p), m.beta(p)
    lhs = P.scale(src.f, be * be)
    if m.s == 1:
        rhs = P.compose(tgt.f, P.poly([0, al]))
    else:
        # x^6 f_tgt(alpha / x)
        rhs = P.poly([0] * (6 - len(tgt.f) + 1) + [c * al**k for k, c in reversed(list(enumerate(tgt.f)))])
    return lhs == rhs


CANONICAL = frozenset({(0, 1), (0, 3), (0, 2), (2, 1), (2, 3), (2, 2)})

# one-step isomorphisms between residue classes (i, j) mod 4
_STEPS: dict[tuple[int, int], tuple[tuple[int, int], MonomialMap]] = {
    (1, 3): ((0, 1), MonomialMap(1, 2, -1, 1, 2, -3)),
    (1, 1): ((0, 3), MonomialMap(1, 2, -1, 1, 4, -3)),
    (1, 2): ((0, 2), MonomialMap(1, 2, -1, 1, 3, -3)),
    (3, 3): ((2, 1), MonomialMap(3, 2, -1, 5, 4, -3).inverse()),
    (3, 1): ((2, 3), MonomialMap(3, 2, -1, 5, 2, -3).inverse()),
    (3, 2): ((2, 2), MonomialMap(3, 2, -1, 5, 3, -3).inverse()),
}


@dataclass(frozen=True)
class Normalization:
    source: tuple[int, int]
    target: tuple[int, int]
    map: MonomialMap

    def apply(self, pt: CurvePoint, p: int) -> CurvePoint:
        return self.map.apply(pt, p)


def normalize_family(i: int, j: int) -> Normalization:
    """Isomorphism from C^(p;i,j) to the representative with (i, j) in CANONICAL (or (i mod 4, 0))."""
    ki, kj = i // 4, j // 4
    m = MonomialMap(a2=-2 * ki, b2=-5 * ki).then(MonomialMap(ap=-2 * kj, bp=-5 * kj))
    cur = (i % 4, j % 4)
    if cur[1] != 0 and cur in _STEPS:
        cur, step = _STEPS[cur]
        m = m.then(step)
    return Normalization((i, j), cur, m)


# ---------------------------------------------------------------- Richelot


@dataclass(frozen=True)
class QuadTriple:
    G1: P.Poly
    G2: P.Poly
    G3: P.Poly

    def __post_init__(self):
        for g in (self.G1, self.G2, self.G3):
            if P.degree(g) > 2:
                raise ValueError("each factor must have degree <= 2")

    def delta(self) -> Fraction:
        """Determinant of the coefficient rows (g2, g1, g0)."""
        rows = [[g[k] if k < len(g) else Fraction(0) for k in (2, 1, 0)] for g in (self.G1, self.G2, self.G3)]
        (a, b, c), (d, e, f), (g, h, k) = rows
        return a * (e * k - f * h) - b * (d * k - f * g) + c * (d * h - e * g)

    def product(self) -> P.Poly:
        return P.prod([self.G1, self.G2, self.G3])


@dataclass(frozen=True)
class RichelotImage:
    curve: HyperCurve
    delta: Fraction
    H: tuple[P.Poly, P.Poly, P.Poly]


def _wedge(g: P.Poly, h: P.Poly) -> P.Poly:
    # g' h - g h'
    return P.sub(P.mul(P.deriv(g), h), P.mul(g, P.deriv(h)))


def richelot(G: QuadTriple) -> RichelotImage:
    """The Richelot-isogenous curve Delta y^2 = H1 H2 H3."""
    delta = G.delta()
    if delta == 0:
        raise ValueError("degenerate Richelot kernel: Delta = 0")
    H = (_wedge(G.G2, G.G3), _wedge(G.G3, G.G1), _wedge(G.G1, G.G2))
    f = P.scale(P.prod(H), 1 / delta)
    return RichelotImage(HyperCurve(f, "richelot-image"), delta, H)


def family_triple(A: Rational) -> QuadTriple:
    return QuadTriple(P.X, P.poly([A, 0, 1]), P.poly([2 * Fraction(A), 0, 1]))


# raw image 2x(x^2 - A)(x^2 - 2A) -> x(x^2 - 4A)(x^2 - 8A) under (x, y) -> (2x, 4y)
RICHELOT_FAMILY_SCALING = MonomialMap(a2=1, b2=2)


def richelot_family_image(p: int, i: int, j: int) -> HyperCurve:
    """y^2 = x(x^2 - 2^(i+2) p^j)(x^2 - 2^(i+3) p^j)."""
    A = Fraction(2) ** i * Fraction(p) ** j
    return HyperCurve(family_poly(-4 * A, -8 * A), f"richelot-image({p},{i},{j})")


def reduced_richelot_image(p: int, i: int, j: int) -> HyperCurve:
    """For i = 2 and odd j, the image x(x^2 - 16 p^j)(x^2 - 32 p^j) rescaled to x(x^2 - p^j)(x^2 - 2p^j)."""
    if i != 2 or j % 2 == 0:
        raise ValueError("reduced model needs i = 2 and odd j")
    pj = Fraction(p) ** j
    return HyperCurve(family_poly(-pj, -2 * pj), f"reduced-image({p},{j})")


# (x, y) on x(x^2 - 16A)(x^2 - 32A) -> (x/4, y/32) on x(x^2 - A)(x^2 - 2A)
REDUCED_IMAGE_SCALING = MonomialMap(a2=-2, b2=-5)


# ---------------------------------------------------------------- point search

_FIRST_MODULUS = 64 * 63 * 65 * 11
_SIEVE_MODULI = (17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61)


def _square_table(m: int) -> np.ndarray:
    table = np.zeros(m, dtype=bool)
    table[np.arange(m, dtype=np.int64) ** 2 % m] = True
    return table


_QR_TABLES = {m: _square_table(m) for m in _SIEVE_MODULI}


@lru_cache(maxsize=1)
def _first_table() -> np.ndarray:
    # squares mod 64*63*65*11, assembled from the prime-power factors by CRT
    x = np.arange(_FIRST_MODULUS, dtype=np.int64)
    ok = np.ones(_FIRST_MODULUS, dtype=bool)
    for m in (64, 9, 7, 5, 13, 11):
        ok &= _square_table(m)[x % m]
    return ok


def integral_model(f: P.Poly) -> tuple[list[int], int]:
    """(h, D) with h = D^2 f integral; then y^2 = f(x) iff (D y)^2 = h(x)."""
    D = 1
    for c in f:
        D = D * c.denominator // math.gcd(D, c.denominator)
    return [int(c * D * D) for c in f], D


_W_BLOCK = 64


def _homogeneous_mod(h: Sequence[int], U: np.ndarray, W: np.ndarray, m: int) -> np.ndarray:
    # sum_k h_k U^k W^(6-k) mod m, Horner in U, elementwise over paired arrays
    Um = U % m
    Wm = W % m
    wpow = [np.ones_like(Wm)]
    for _ in range(6):
        wpow.append(wpow[-1] * Wm % m)
    acc = np.zeros_like(Um)
    for k in range(len(h) - 1, -1, -1):
        acc = (acc * Um + h[k] % m * wpow[6 - k]) % m
    return acc


def _search_block(h: Sequence[int], D: int, bound: int, ws: Sequence[int]) -> list[tuple[int, int, int]]:
    found = []
    first = _first_table()
    row = np.arange(-bound, bound + 1, dtype=np.int64)
    for start in range(0, len(ws), _W_BLOCK):
        Wb = np.array(ws[start:start + _W_BLOCK], dtype=np.int64)
        U, W = np.meshgrid(row, Wb)
        keep = np.gcd(U, W) == 1
        U, W = U[keep], W[keep]
        keep = first[_homogeneous_mod(h, U, W, _FIRST_MODULUS)]
        U, W = U[keep], W[keep]
        for m in _SIEVE_MODULI:
            keep = _QR_TABLES[m][_homogeneous_mod(h, U, W, m)]
            U, W = U[keep], W[keep]
        for u, w in zip(U.tolist(), W.tolist()):
            val = sum(c * u**k * w ** (6 - k) for k, c in enumerate(h))
            if val < 0:
                continue
            r = int_sqrt_exact(val)
            if r is not None:
                found.append((u, w, r))
    return found


def search_points(C: HyperCurve, height_bound: int, workers: int = 1) -> list[CurvePoint]:
    """All points with x = U/W, |U|, W <= height_bound coprime, plus the points at infinity."""
    if height_bound < 1:
        raise ValueError("height bound must be >= 1")
    h, D = integral_model(C.f)
    ws = list(range(1, height_bound + 1))
    if workers > 1:
        chunks = [ws[k::workers] for k in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_search_block, [h] * workers, [D] * workers, [height_bound] * workers, chunks)
            raw = [t for part in parts for t in part]
    else:
        raw = _search_block(h, D, height_bound, ws)
    points = list(C.points_at_infinity())
    for u, w, r in raw:
        x = Fraction(u, w)
        y = Fraction(r, D * w**3)
        points += [CurvePoint.affine(x, y), CurvePoint.affine(x, -y)]
    out = sort_points(points)
    assert all(C.contains(pt) for pt in out)
    return out


# ---------------------------------------------------------------- integral filter


def lutz_nagell_candidates(C: HyperCurve) -> list[CurvePoint]:
    """Integral (a, b) on a monic odd-degree model with b = 0 or b^2 | disc(f)."""
    if C.degree % 2 == 0:
        raise ValueError("needs an odd-degree model")
    if C.f[-1] != 1 or any(c.denominator != 1 for c in C.f):
        raise ValueError("needs a monic model with integer coefficients")
    disc = C.discriminant()
    assert disc.denominator == 1
    disc = int(disc)
    pts = [CurvePoint.affine(a, 0) for a in P.integer_roots(C.f)]
    # b^2 | disc  <=>  b | prod q^(e // 2)
    root = 1
    for q, e in factorize(disc).factors:
        root *= q ** (e // 2)
    for b in divisors(root):
        shifted = P.sub(C.f, (Fraction(b * b),))
        for a in P.integer_roots(shifted):
            pts += [CurvePoint.affine(a, b), CurvePoint.affine(a, -b)]
    return sort_points(pts)


def rational_sqrt_or_none(x: Rational) -> Fraction | None:
    return rat_sqrt_exact(x)
