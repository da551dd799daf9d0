"""Real quadratic fields: exact elements, fundamental units, ideal classes and S-unit square classes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from .arith import (
    Rational,
    factorize,
    is_prime,
    is_rational_square,
    legendre_symbol,
    rat_sqrt_exact,
    residue,
    squarefree_part,
    valuation,
)

MAX_DISCRIMINANT = 4 * 10**8  # Minkowski bound sqrt(D)/2 < 1e4


class UnsupportedField(ValueError):
    """Raised when the 2-part of the S-class group is nontrivial."""


@dataclass(frozen=True)
class QuadElt:
    """The element a + b*sqrt(d) of Q(sqrt(d)), with rational a, b."""

    d: int
    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def from_integral(cls, d: int, a: int, b: int, denom: int = 1) -> "QuadElt":
        return cls(d, Fraction(a, denom), Fraction(b, denom))

    @classmethod
    def root(cls, d: int) -> "QuadElt":
        return cls(d, 0, 1)

    def _coerce(self, other) -> "QuadElt":
        if isinstance(other, QuadElt):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt({self.d})) and Q(sqrt({other.d}))")
            return other
        return QuadElt(self.d, Fraction(other))

    def __add__(self, other):
        o = self._coerce(other)
        return QuadElt(self.d, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadElt(self.d, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadElt(self.d, self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conj(self) -> "QuadElt":
        return QuadElt(self.d, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadElt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadElt(self.d, c.a / n, c.b / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = QuadElt(self.d, 1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def sign(self) -> int:
        """Sign of a + b*sqrt(d) under the embedding with sqrt(d) > 0 (d > 0)."""
        return real_sign(self.a, self.b, self.d)

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def is_integral(self) -> bool:
        t, n = self.trace(), self.norm()
        return t.denominator == 1 and n.denominator == 1

    def is_square(self) -> bool:
        """Exact test for membership in K^x2."""
        if self.is_zero():
            raise ValueError("zero is excluded")
        if self.b == 0:
            return is_rational_square(self.a) or (self.a / self.d > 0 and is_rational_square(self.a / self.d))
        n = rat_sqrt_exact(self.norm()) if self.norm() > 0 else None
        if n is None:
            return False
        for m in (n, -n):
            half = (self.a + m) / 2
            if half != 0 and is_rational_square(half):
                return True
        return False

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        root = f"sqrt({self.d})"
        b = "" if self.b == 1 else ("-" if self.b == -1 else f"{self.b}*")
        if self.a == 0:
            return f"{b}{root}"
        sign = "+" if self.b > 0 else "-"
        bb = abs(self.b)
        return f"{self.a}{sign}{'' if bb == 1 else f'{bb}*'}{root}"


def real_sign(a: Rational, b: Rational, d: int) -> int:
    """Sign of a + b*sqrt(d) for d > 0, decided exactly."""
    a, b = Fraction(a), Fraction(b)
    if b == 0 or d == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return 1 if b > 0 else -1
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # opposite signs: compare a^2 and d b^2
    diff = a * a - d * b * b
    if diff == 0:
        return 0
    return ((a > 0) - (a < 0)) if diff > 0 else ((b > 0) - (b < 0))


@dataclass(frozen=True)
class RealQuadField:
    d: int

    def __post_init__(self):
        if self.d <= 1 or squarefree_part(self.d) != self.d:
            raise ValueError(f"d must be a squarefree integer > 1, got {self.d}")

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    @property
    def sigma(self) -> int:
        return self.discriminant % 2

    def omega(self) -> QuadElt:
        """Generator of the ring of integers over Z: sqrt(d) or (1 + sqrt(d))/2."""
        if self.sigma:
            return QuadElt(self.d, Fraction(1, 2), Fraction(1, 2))
        return QuadElt(self.d, 0, 1)

    def elt(self, a: Rational, b: Rational = 0) -> QuadElt:
        return QuadElt(self.d, a, b)

    def to_omega(self, x: QuadElt) -> tuple[Fraction, Fraction]:
        """Coordinates (s, t) with x = s + t*omega."""
        if self.sigma:
            return x.a - x.b, 2 * x.b
        return x.a, x.b

    def from_omega(self, s: Rational, t: Rational) -> QuadElt:
        return self.elt(s) + self.omega() * Fraction(t)


# ---------------------------------------------------------------- units


@lru_cache(maxsize=None)
def fundamental_unit(K: RealQuadField) -> QuadElt:
    """Fundamental unit eps > 1 from the continued fraction of omega."""
    d = K.d
    P0, Q0 = (1, 2) if K.sigma else (0, 1)
    r = math.isqrt(d)
    P, Q = P0, Q0
    p_prev, p_cur = 1, (P + r) // Q
    q_prev, q_cur = 0, 1
    k = 0
    while True:
        a = (P + r) // Q
        if k > 0:
            p_prev, p_cur = p_cur, a * p_cur + p_prev
            q_prev, q_cur = q_cur, a * q_cur + q_prev
        P = a * Q - P
        Q = (d - P * P) // Q
        k += 1
        if Q == Q0:
            break
    # p_cur/q_cur is the (k-1)-th convergent of omega; p - q*conj(omega) is a unit
    eps = K.elt(p_cur) - K.omega().conj() * q_cur
    if eps.sign() < 0:
        eps = -eps
    if real_sign(eps.a - 1, eps.b, d) < 0:
        eps = eps.inverse()
    assert abs(eps.norm()) == 1, eps
    return eps


def verify_norm_minus_one(p: int) -> tuple[bool, bool]:
    """Norms of the fundamental units of Q(sqrt p) and Q(sqrt 2p) equal -1 (p = 5 mod 8)."""
    if not is_prime(p) or p % 8 != 5:
        raise ValueError(f"need a prime p = 5 mod 8, got {p}")
    return tuple(fundamental_unit(RealQuadField(d)).norm() == -1 for d in (p, 2 * p))


@dataclass(frozen=True)
class UnitResidueAudit:
    """Squareness of eps and 2*eps in Z_p[sqrt p], by two methods."""

    p: int
    eps_residue: int
    eps_nonsquare_qr: bool
    two_eps_nonsquare_qr: bool
    eps_nonsquare_eighth_root: bool | None
    two_eps_nonsquare_eighth_root: bool | None

    @property
    def disagreements(self) -> list[str]:
        out = []
        for name, qr, eighth in (
            ("eps", self.eps_nonsquare_qr, self.eps_nonsquare_eighth_root),
            ("2eps", self.two_eps_nonsquare_qr, self.two_eps_nonsquare_eighth_root),
        ):
            if eighth is None:
                out.append(f"{name}: eighth-root argument does not apply (residue^2 != -1)")
            elif eighth != qr:
                out.append(f"{name}: residue test {qr} vs eighth-root argument {eighth}")
        return out


def _eighth_root_argument(r: int, p: int) -> bool | None:
    # a residue with r^2 = -1 is a square iff F_p has a primitive 8th root of unity
    if (r * r + 1) % p:
        return None
    return p % 8 != 1


def unit_residue_audit(p: int) -> UnitResidueAudit:
    if not is_prime(p) or p % 8 != 5:
        raise ValueError(f"need a prime p = 5 mod 8, got {p}")
    eps = fundamental_unit(RealQuadField(p))
    r = residue(eps.a, p)
    r2 = 2 * r % p
    return UnitResidueAudit(
        p=p,
        eps_residue=r,
        eps_nonsquare_qr=legendre_symbol(r, p) == -1,
        two_eps_nonsquare_qr=legendre_symbol(r2, p) == -1,
        eps_nonsquare_eighth_root=_eighth_root_argument(r, p),
        two_eps_nonsquare_eighth_root=_eighth_root_argument(r2, p),
    )


def unit_nonsquare_at_p(p: int) -> tuple[bool, bool]:
    """(eps is a non-square, 2*eps is a non-square) in Z_p[sqrt p], by the residue test."""
    audit = unit_residue_audit(p)
    return audit.eps_nonsquare_qr, audit.two_eps_nonsquare_qr


# ---------------------------------------------------------------- ideals


def _hnf(vectors: Iterable[tuple[int, int]]) -> tuple[int, int, int]:
    """Lattice Z(A,0) + Z(B,C) spanned by integer vectors, with 0 <= B < A."""
    vecs = [list(v) for v in vectors if v != (0, 0)]
    pivot: list[int] | None = None
    rest: list[list[int]] = []
    for v in vecs:
        if pivot is None:
            if v[1] != 0:
                pivot = v
            else:
                rest.append(v)
            continue
        # gcd step on the second coordinate
        a, b = pivot, v
        while b[1] != 0:
            q = a[1] // b[1]
            a, b = b, [a[0] - q * b[0], a[1] - q * b[1]]
        pivot = a
        rest.append(b)
    if pivot is None:
        raise ValueError("lattice has rank < 2")
    if pivot[1] < 0:
        pivot = [-pivot[0], -pivot[1]]
    A = 0
    for v in rest:
        A = math.gcd(A, v[0])
    if A == 0:
        raise ValueError("lattice has rank < 2")
    return A, pivot[0] % A, pivot[1]


@dataclass(frozen=True)
class Ideal:
    """Integral ideal with Z-basis {A, B + C*omega}."""

    K: RealQuadField
    A: int
    B: int
    C: int

    @classmethod
    def from_generators(cls, K: RealQuadField, gens: Sequence[QuadElt]) -> "Ideal":
        w = K.omega()
        vecs = []
        for g in gens:
            for m in (g, g * w):
                s, t = K.to_omega(m)
                if s.denominator != 1 or t.denominator != 1:
                    raise ValueError(f"{g} is not integral")
                vecs.append((int(s), int(t)))
        return cls(K, *_hnf(vecs))

    @classmethod
    def primitive(cls, K: RealQuadField, a: int, b: int) -> "Ideal":
        """The ideal [a, (b + sqrt D)/2]."""
        D = K.discriminant
        if (b * b - D) % (4 * a):
            raise ValueError(f"({a}, {b}) is not an ideal of discriminant {D}")
        return cls(K, a, ((b - K.sigma) // 2) % a, 1)

    @classmethod
    def unit(cls, K: RealQuadField) -> "Ideal":
        return cls(K, 1, 0, 1)

    def basis(self) -> tuple[QuadElt, QuadElt]:
        return self.K.elt(self.A), self.K.from_omega(self.B, self.C)

    def norm(self) -> int:
        return self.A * self.C

    def __mul__(self, other: "Ideal") -> "Ideal":
        vecs = []
        for x in self.basis():
            for y in other.basis():
                s, t = self.K.to_omega(x * y)
                vecs.append((int(s), int(t)))
        return Ideal(self.K, *_hnf(vecs))

    def __pow__(self, n: int) -> "Ideal":
        out = Ideal.unit(self.K)
        for _ in range(n):
            out = out * self
        return out

    def conj(self) -> "Ideal":
        return Ideal.from_generators(self.K, [x.conj() for x in self.basis()])

    def contains(self, x: QuadElt) -> bool:
        s, t = self.K.to_omega(x)
        if s.denominator != 1 or t.denominator != 1:
            return False
        s, t = int(s), int(t)
        if t % self.C:
            return False
        return (s - (t // self.C) * self.B) % self.A == 0

    def content_and_ab(self) -> tuple[int, int, int]:
        """(g, a, b) with self = g * [a, (b + sqrt D)/2]."""
        g = self.C
        a = self.A // g
        b = 2 * (self.B // g) + self.K.sigma
        return g, a, b


def _is_reduced(D: int, a: int, b: int) -> bool:
    # |sqrt D - 2a| < b < sqrt D
    if not (0 < b and b * b < D):
        return False
    if 2 * a - b > 0 and (2 * a - b) ** 2 >= D:
        return False
    return D < (2 * a + b) ** 2


def _normalize_b(D: int, a: int, b: int) -> int:
    m = 2 * a
    if a * a < D:
        # largest b' = b mod 2a with b' < sqrt D
        r = math.isqrt(D)
        top = r if r * r < D else r - 1
        return top - ((top - b) % m)
    b %= m
    return b - m if b > a else b


def _rho(K: RealQuadField, a: int, b: int) -> tuple[int, int, QuadElt]:
    """One reduction step: [a, (b+sqrtD)/2] = gamma * [a', (b'+sqrtD)/2]."""
    D = K.discriminant
    c = (b * b - D) // (4 * a)
    beta = QuadElt(K.d, Fraction(b, 2), Fraction(1, 2) if K.sigma else Fraction(1))
    gamma = beta / c
    a2 = abs(c)
    b2 = _normalize_b(D, a2, -b)
    return a2, b2, gamma


def _reduce(K: RealQuadField, a: int, b: int) -> tuple[int, int, QuadElt]:
    D = K.discriminant
    gamma = K.elt(1)
    b = _normalize_b(D, a, b)
    while not _is_reduced(D, a, b):
        a, b, g = _rho(K, a, b)
        gamma = gamma * g
    return a, b, gamma


@lru_cache(maxsize=None)
def _reduced_ideals(K: RealQuadField) -> tuple[tuple[int, int], ...]:
    D = K.discriminant
    if D > MAX_DISCRIMINANT:
        raise ValueError(f"discriminant {D} out of supported range")
    out = []
    b = K.sigma
    if b == 0:
        b = 2
    while b * b < D:
        n = (D - b * b) // 4
        for a in range(1, math.isqrt(D) + 1):
            if n % a == 0 and _is_reduced(D, a, b):
                out.append((a, b))
        b += 2
    return tuple(sorted(out))


@dataclass
class _Cycles:
    K: RealQuadField
    members: list[list[tuple[int, int]]]
    index: dict[tuple[int, int], int]
    principal: int


@lru_cache(maxsize=None)
def _cycles(K: RealQuadField) -> _Cycles:
    index: dict[tuple[int, int], int] = {}
    members: list[list[tuple[int, int]]] = []
    for start in _reduced_ideals(K):
        if start in index:
            continue
        cyc = []
        node = start
        while node not in index:
            index[node] = len(members)
            cyc.append(node)
            a, b, _ = _rho(K, *node)
            node = (a, b)
        members.append(cyc)
    principal = next(i for i, cyc in enumerate(members) if any(a == 1 for a, _ in cyc))
    return _Cycles(K, members, index, principal)


def _walk(K: RealQuadField, start: tuple[int, int], target: tuple[int, int]) -> QuadElt | None:
    """delta with I_start = delta * I_target when both lie on one cycle."""
    delta = K.elt(1)
    node = start
    seen = set()
    while node != target:
        if node in seen:
            return None
        seen.add(node)
        a, b, g = _rho(K, *node)
        delta = delta * g
        node = (a, b)
    return delta


def ideal_ratio(I: Ideal, J: Ideal) -> QuadElt | None:
    """alpha with I = alpha * J, or None if the ideals are in different classes."""
    K = I.K
    gi, ai, bi = I.content_and_ab()
    gj, aj, bj = J.content_and_ab()
    ri = _reduce(K, ai, bi)
    rj = _reduce(K, aj, bj)
    cyc = _cycles(K)
    if cyc.index[ri[:2]] != cyc.index[rj[:2]]:
        return None
    delta = _walk(K, ri[:2], rj[:2])
    alpha = ri[2] * delta / rj[2] * Fraction(gi, gj)
    return alpha


def principal_generator(I: Ideal) -> QuadElt | None:
    K = I.K
    g, a, b = I.content_and_ab()
    a, b, gamma = _reduce(K, a, b)
    cyc = _cycles(K)
    if cyc.index[(a, b)] != cyc.principal:
        return None
    node = (a, b)
    delta = K.elt(1)
    while node[0] != 1:
        a2, b2, step = _rho(K, *node)
        delta = delta * step
        node = (a2, b2)
    return gamma * delta * g


def balance(alpha: QuadElt, eps: QuadElt) -> QuadElt:
    """Unit multiple of alpha, positive, with |alpha/alpha'| in (1/eps, eps]."""
    while True:
        x, xc = abs(alpha), abs(alpha.conj())
        if (x - eps * xc).sign() > 0:
            alpha = alpha / eps
        elif (xc - eps * x).sign() >= 0:
            alpha = alpha * eps
        else:
            break
    return abs(alpha)


def primes_above(K: RealQuadField, q: int) -> list[Ideal]:
    D = K.discriminant
    roots = [b for b in range(2 * q) if b % 2 == D % 2 and (b * b - D) % (4 * q) == 0]
    if D % q == 0:
        return [Ideal.primitive(K, q, roots[0])]
    if q == 2:
        split = D % 8 == 1
    else:
        split = legendre_symbol(D, q) == 1
    if not split:
        return [Ideal(K, q, 0, q)]
    return [Ideal.primitive(K, q, roots[0]), Ideal.primitive(K, q, roots[-1])]


# ---------------------------------------------------------------- class group


class ClassGroup:
    """The (wide) ideal class group as cycles of reduced ideals."""

    def __init__(self, K: RealQuadField):
        self.K = K
        self._cyc = _cycles(K)
        self.order = len(self._cyc.members)
        self.identity = self._cyc.principal
        self.reps = [Ideal.primitive(K, *cyc[0]) for cyc in self._cyc.members]

    def classify(self, I: Ideal) -> int:
        _, a, b = I.content_and_ab()
        a, b, _ = _reduce(self.K, a, b)
        return self._cyc.index[(a, b)]

    def mul(self, i: int, j: int) -> int:
        return self.classify(self.reps[i] * self.reps[j])

    def power(self, i: int, n: int) -> int:
        out = self.identity
        for _ in range(n):
            out = self.mul(out, i)
        return out

    def element_order(self, i: int) -> int:
        n, x = 1, i
        while x != self.identity:
            x = self.mul(x, i)
            n += 1
        return n

    def relations(self, gens: Sequence[int]) -> tuple[list[tuple[int, ...]], dict[int, tuple[int, ...]]]:
        """Triangular relation basis for gens, with nonnegative exponents, and the generated subgroup."""
        m = len(gens)
        sub: dict[int, tuple[int, ...]] = {self.identity: (0,) * m}
        rels: list[tuple[int, ...]] = []
        for i, g in enumerate(gens):
            e, x = 1, g
            while x not in sub:
                e += 1
                x = self.mul(x, g)
            # g^e * inv = 1 with inv in the subgroup built so far
            inv = next(h for h in sub if self.mul(h, x) == self.identity)
            vec = list(sub[inv])
            vec[i] += e
            rels.append(tuple(vec))
            new = dict(sub)
            cur = self.identity
            for k in range(1, e):
                cur = self.mul(cur, g)
                for h, hv in sub.items():
                    key = self.mul(h, cur)
                    if key not in new:
                        vv = list(hv)
                        vv[i] += k
                        new[key] = tuple(vv)
            sub = new
        return rels, sub


@dataclass(frozen=True)
class ClassGroupData:
    class_number: int
    narrow_class_number: int
    generators: tuple[Ideal, ...]
    relations: tuple[tuple[int, ...], ...]
    two_rank: int


def class_group(K: RealQuadField) -> ClassGroupData:
    G = ClassGroup(K)
    order_key = sorted(range(G.order), key=lambda i: (G.reps[i].norm(), i))
    gens: list[int] = []
    sub = {G.identity}
    for i in order_key:
        if i not in sub:
            gens.append(i)
            _, sub_map = G.relations(gens)
            sub = set(sub_map)
    rels, sub_map = G.relations(gens)
    assert len(sub_map) == G.order
    two_torsion = sum(1 for i in range(G.order) if G.mul(i, i) == G.identity)
    narrow = G.order * (1 if fundamental_unit(K).norm() == -1 else 2)
    return ClassGroupData(
        class_number=G.order,
        narrow_class_number=narrow,
        generators=tuple(G.reps[i] for i in gens),
        relations=tuple(rels),
        two_rank=two_torsion.bit_length() - 1,
    )


# ---------------------------------------------------------------- S-units


@lru_cache(maxsize=None)
def s_unit_square_basis(K: RealQuadField, S: tuple[int, ...]) -> tuple[QuadElt, ...]:
    """F2-basis of K(S,2): (-1, eps, generators over S[0], generators over S[1], ...)."""
    eps = fundamental_unit(K)
    G = ClassGroup(K)
    ideals = [I for q in S for I in primes_above(K, q)]
    classes = [G.classify(I) for I in ideals]
    rels, sub = G.relations(classes)
    if (G.order // len(sub)) % 2 == 0:
        raise UnsupportedField(f"S-class group of Q(sqrt {K.d}) has even order")
    gens = []
    for rel in rels:
        J = Ideal.unit(K)
        for I, e in zip(ideals, rel):
            J = J * I**e
        alpha = principal_generator(J)
        assert alpha is not None and J == Ideal.from_generators(K, [alpha])
        gens.append(balance(alpha, eps))
    return (K.elt(-1), eps, *gens)


def square_class_coords(x: QuadElt, basis: Sequence[QuadElt]) -> tuple[int, ...] | None:
    """Exponents c in F2 with x * prod(basis^c) a square in K, or None if x is outside the span."""
    for bits in product((0, 1), repeat=len(basis)):
        y = x
        for b, e in zip(basis, bits):
            if e:
                y = y * b
        if y.is_square():
            return bits
    return None


def is_unramified_outside(x: QuadElt, S: Iterable[int]) -> bool:
    """K(sqrt x)/K is unramified outside S: every prime outside S divides (x) to even power."""
    n = x.norm()
    S = set(S)
    K = RealQuadField(x.d)
    for q, _ in factorize(n.numerator * n.denominator).factors:
        if q in S:
            continue
        for P in primes_above(K, q):
            if ideal_valuation(P, x) % 2:
                return False
    return True


def ideal_valuation(P: Ideal, x: QuadElt) -> int:
    """v_P(x) for a prime ideal P (as returned by primes_above) and nonzero x."""
    q = P.A
    m = x.a.denominator * x.b.denominator
    y = x * m
    ram = 2 if P.K.discriminant % q == 0 else 1
    k, Pk = 0, P
    while Pk.contains(y):
        k += 1
        Pk = Pk * P
    return k - ram * valuation(m, q)
