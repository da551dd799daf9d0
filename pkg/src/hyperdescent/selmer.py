"""2-descent on the Jacobian of y^2 = x (x^2 - a)(x^2 - b), b = 2a.

Classes in L^x / L^x2, with L = Q x Q(sqrt a) x Q(sqrt b), are stored as exact triples.
Every local computation reduces to the frozen F2 coordinates of ``localsq``.
A degree-0 divisor supported on Weierstrass points is described by its set of roots.
A root is a pair ``(s, c)`` standing for the number s*sqrt(c), and ``(0, 0)`` is the root 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

from . import f2
from .arith import INF, factorize, int_sqrt_exact, is_square_local, padic_sqrt, squarefree_part, valuation
from .localsq import SPLIT, LocalEtale, embed_global_int, place_name, rational_class, square_class
from .curves import family_poly
from .poly import evaluate
from .quadfield import QuadElt, RealQuadField, fundamental_unit, s_unit_square_basis, square_class_coords

Root = tuple[int, int]
ZERO_ROOT: Root = (0, 0)
SCAN_LIMIT = 500
_PREC = 80


class DescentFailure(RuntimeError):
    """A structural check of the descent failed (dimension mismatch or scan exhaustion)."""

    def __init__(self, message: str, partial: Sequence[int] = ()):
        super().__init__(message)
        self.partial = list(partial)


# ---------------------------------------------------------------- algebra


@dataclass(frozen=True)
class EtaleAlgebra:
    a: int
    b: int

    def __post_init__(self):
        if self.a <= 0 or self.b != 2 * self.a:
            raise ValueError("expected 0 < a and b = 2a")
        if squarefree_part(self.a) == 1 or squarefree_part(self.b) == 1:
            raise ValueError("a and b must be nonsquares")

    @classmethod
    def for_prime(cls, p: int, j: int) -> "EtaleAlgebra":
        return cls(p**j, 2 * p**j)

    @property
    def f(self):
        return family_poly(-self.a, -self.b)

    def f_at(self, x) -> Fraction:
        return evaluate(self.f, Fraction(x))

    @property
    def bad_primes(self) -> tuple[int, ...]:
        return tuple(q for q, _ in factorize(2 * self.a).factors)

    @property
    def places(self) -> tuple[int, ...]:
        return (*self.bad_primes, INF)

    @property
    def roots(self) -> tuple[Root, ...]:
        return (ZERO_ROOT, (1, self.a), (-1, self.a), (1, self.b), (-1, self.b))

    def field(self, c: int) -> RealQuadField:
        return RealQuadField(squarefree_part(c))

    def rebase(self, x: QuadElt, c: int) -> QuadElt:
        """x in Q(sqrt d0) rewritten over sqrt(c), where c = d0 m^2."""
        d0 = squarefree_part(c)
        if x.d == c:
            return x
        if x.d != d0:
            raise ValueError(f"element of Q(sqrt {x.d}) does not live over sqrt {c}")
        return QuadElt(c, x.a, x.b / int_sqrt_exact(c // d0))

    def to_field(self, x: QuadElt) -> QuadElt:
        d0 = squarefree_part(x.d)
        return QuadElt(d0, x.a, x.b * int_sqrt_exact(x.d // d0))

    def local(self, v: int) -> LocalEtale:
        return LocalEtale(v, self.a, self.b)

    def triple(self, q, x2, x3) -> "GlobalSquareClass":
        def lift(x, c):
            if isinstance(x, QuadElt):
                return self.rebase(x, c)
            return QuadElt(c, Fraction(x))

        return GlobalSquareClass(Fraction(q), lift(x2, self.a), lift(x3, self.b))

    @property
    def T2(self) -> QuadElt:
        return QuadElt.root(self.a)

    @property
    def T3(self) -> QuadElt:
        return QuadElt.root(self.b)

    def x_minus_T(self, x0) -> "GlobalSquareClass":
        x0 = Fraction(x0)
        return self.triple(x0, QuadElt(self.a, x0, -1), QuadElt(self.b, x0, -1))


@dataclass(frozen=True)
class GlobalSquareClass:
    q: Fraction
    x2: QuadElt
    x3: QuadElt

    def __post_init__(self):
        if self.q == 0 or self.x2.is_zero() or self.x3.is_zero():
            raise ValueError("components must be nonzero")

    def __mul__(self, other: "GlobalSquareClass") -> "GlobalSquareClass":
        return GlobalSquareClass(self.q * other.q, self.x2 * other.x2, self.x3 * other.x3)

    def norm(self) -> Fraction:
        return self.q * self.x2.norm() * self.x3.norm()

    def res(self, E: LocalEtale) -> int:
        return embed_global_int((self.q, self.x2, self.x3), E)

    def __str__(self) -> str:
        return f"({self.q}; {self.x2}; {self.x3})"


def product_of(classes: Iterable[GlobalSquareClass], L: EtaleAlgebra) -> GlobalSquareClass:
    return reduce(lambda x, y: x * y, classes, L.triple(1, 1, 1))


# ---------------------------------------------------------------- L(S,2) and the norm


@dataclass(frozen=True)
class SUnitBasis:
    """F2 basis of L(S,2) with coordinates: rational block, then the two quadratic blocks."""

    L: EtaleAlgebra
    primes: tuple[int, ...]
    rational: tuple[Fraction, ...]
    second: tuple[QuadElt, ...]
    third: tuple[QuadElt, ...]

    @property
    def elements(self) -> list[GlobalSquareClass]:
        L = self.L
        return (
            [L.triple(q, 1, 1) for q in self.rational]
            + [L.triple(1, x, 1) for x in self.second]
            + [L.triple(1, 1, x) for x in self.third]
        )

    @property
    def dim(self) -> int:
        return len(self.rational) + len(self.second) + len(self.third)

    def rational_coords(self, q: Fraction) -> tuple[int, ...]:
        bits = [int(q < 0)]
        rest = abs(q)
        for ell in self.primes:
            e = valuation(rest, ell)
            bits.append(e % 2)
            rest /= Fraction(ell) ** e
        if squarefree_part(rest) != 1:
            raise ValueError(f"{q} is not an S-unit modulo squares")
        return tuple(bits)

    def coords(self, alpha: GlobalSquareClass) -> int:
        """Coordinates of alpha; raises if alpha is outside L(S,2)."""
        c2 = square_class_coords(self.L.to_field(alpha.x2), self.second)
        c3 = square_class_coords(self.L.to_field(alpha.x3), self.third)
        if c2 is None or c3 is None:
            raise ValueError(f"{alpha} is not in L(S,2)")
        return f2.bits_to_int(self.rational_coords(alpha.q) + c2 + c3)


@lru_cache(maxsize=None)
def s_unit_basis(L: EtaleAlgebra) -> SUnitBasis:
    S = L.bad_primes
    rational = (Fraction(-1), *(Fraction(q) for q in S))
    second = s_unit_square_basis(L.field(L.a), S)
    third = s_unit_square_basis(L.field(L.b), S)
    return SUnitBasis(L, S, rational, second, third)


@dataclass(frozen=True)
class KernelOfNorm:
    ls2: SUnitBasis
    norm_images: tuple[int, ...]
    basis: tuple[GlobalSquareClass, ...]


@lru_cache(maxsize=None)
def ker_norm_basis(L: EtaleAlgebra) -> KernelOfNorm:
    ls2 = s_unit_basis(L)
    elements = ls2.elements
    images = tuple(f2.bits_to_int(ls2.rational_coords(x.norm())) for x in elements)
    combos = f2.kernel(images)
    expected = ls2.dim - f2.rank(images)
    if ls2.dim != 11 or len(combos) != 8 or len(combos) != expected:
        raise DescentFailure(
            f"kernel of the norm has dimension {len(combos)} inside L(S,2) of dimension {ls2.dim}"
        )
    basis = tuple(
        product_of((elements[i] for i in range(ls2.dim) if (c >> i) & 1), L) for c in combos
    )
    return KernelOfNorm(ls2, images, basis)


# ---------------------------------------------------------------- 2-torsion


def _splits(c: int, v: int | None) -> bool:
    if v is None:
        return squarefree_part(c) == 1
    if v == INF:
        return c > 0
    return is_square_local(c, v)


def local_factors(L: EtaleAlgebra, v: int | None) -> list[frozenset[Root]]:
    """Irreducible factors of f over Q_v (v None means over Q), as root sets."""
    out = [frozenset([ZERO_ROOT])]
    for c in (L.a, L.b):
        if _splits(c, v):
            out += [frozenset([(1, c)]), frozenset([(-1, c)])]
        else:
            out.append(frozenset([(1, c), (-1, c)]))
    return out


def two_torsion_dim(L: EtaleAlgebra, v: int | None) -> int:
    return len(local_factors(L, v)) - 1


def _finite_root(r: Root, v: int) -> Fraction:
    s, c = r
    return Fraction(0) if s == 0 else s * padic_sqrt(c, v, _PREC)


def _real_key(r: Root) -> int:
    return r[0] * r[1]


def _embedding_class(L: EtaleAlgebra, v: int, t: Root, h: frozenset[Root]) -> tuple[int, ...]:
    """Class at the embedding T -> t of (-1)^deg h (h(T) - f(T)/h(T)), t a Q_v-rational root."""
    others = [r for r in L.roots if r != t and ((t in h) != (r in h))]
    sign = (-1) ** len(h) * (-1 if t in h else 1)
    if v == INF:
        for r in others:
            sign *= 1 if _real_key(t) > _real_key(r) else -1
        return (int(sign < 0),)
    value = Fraction(sign)
    tv = _finite_root(t, v)
    for s, c in others:
        if _splits(c, v):
            value *= tv - _finite_root((s, c), v)
        elif s > 0:  # conjugate pair (t - sqrt c)(t + sqrt c)
            value *= tv * tv - c
    if valuation(value, v) + 8 > _PREC:
        raise ArithmeticError("precision too low for a 2-torsion class")
    return rational_class(value, v)


def _field_element(L: EtaleAlgebra, v: int | None, c: int, h: frozenset[Root]) -> QuadElt:
    """(-1)^deg h (h(T) - f(T)/h(T)) in the component T^2 = c, a field over Q_v."""
    inside = (1, c) in h
    chosen = [r for r in L.roots if r[1] != c and ((r in h) != inside)]
    x = QuadElt(c, (-1) ** len(h) * (-1 if inside else 1))
    T = QuadElt.root(c)
    for r in chosen:
        s, c2 = r
        if s == 0:
            x = x * T
        elif (-s, c2) in chosen:
            if s > 0:
                x = x * (c - c2)
        else:
            x = x * (T - _finite_root(r, v))
    return x


def delta_of_two_torsion(L: EtaleAlgebra, v: int, h: frozenset[Root]) -> int:
    """delta_v of the divisor of roots of the Q_v-factor h, as a local coordinate bitset."""
    if h not in local_factors(L, v):
        raise ValueError(f"{sorted(h)} is not an irreducible factor of f over Q_{place_name(v)}")
    E = L.local(v)
    bits = _embedding_class(L, v, ZERO_ROOT, h)
    for c, A in zip((L.a, L.b), E.components):
        if A.shape == SPLIT:
            for s in (1, -1):
                bits += _embedding_class(L, v, (s, c), h)
        else:
            bits += square_class(_field_element(L, v, c, h), A)
    return f2.bits_to_int(bits)


def delta_global(L: EtaleAlgebra, h: frozenset[Root]) -> GlobalSquareClass:
    """delta of a rational 2-torsion divisor as an exact class of L."""
    if h not in local_factors(L, None):
        raise ValueError("not a rational factor of f")
    inside = ZERO_ROOT in h
    chosen = [r for r in L.roots if r != ZERO_ROOT and ((r in h) != inside)]
    q = Fraction((-1) ** len(h) * (-1 if inside else 1))
    for s, c in chosen:
        if s > 0:
            q *= -c
    return L.triple(q, _field_element(L, None, L.a, h), _field_element(L, None, L.b, h))


def rational_two_torsion(L: EtaleAlgebra) -> tuple[GlobalSquareClass, GlobalSquareClass]:
    """delta of (0,0) - inf and of the pair of points with x^2 = a."""
    return (
        delta_global(L, frozenset([ZERO_ROOT])),
        delta_global(L, frozenset([(1, L.a), (-1, L.a)])),
    )


# ---------------------------------------------------------------- local images


def image_target_dim(L: EtaleAlgebra, v: int) -> int:
    genus = 2
    shift = genus if v == 2 else (-genus if v == INF else 0)
    return two_torsion_dim(L, v) + shift


def is_local_x_coordinate(L: EtaleAlgebra, x0, v: int) -> bool:
    y2 = L.f_at(x0)
    if y2 == 0:
        return False
    return y2 > 0 if v == INF else is_square_local(y2, v)


def _scan_order(limit: int):
    yield 0
    for n in range(1, limit + 1):
        yield n
        yield -n


@dataclass
class LocalImage:
    v: int
    etale: LocalEtale
    two_torsion_dim: int
    target_dim: int
    basis: list[int]
    generators: list[tuple[str, int]] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __contains__(self, vec: int) -> bool:
        return f2.in_span(vec, self.basis)

    def reducer(self) -> f2.Echelon:
        return f2.Echelon(self.basis)


def _factor_label(h: frozenset[Root]) -> str:
    if h == frozenset([ZERO_ROOT]):
        return "x"
    if len(h) == 2:
        return f"x^2-{next(iter(h))[1]}"
    (s, c), = h
    return f"x{'-' if s > 0 else '+'}sqrt({c})"


@lru_cache(maxsize=None)
def _local_image(L: EtaleAlgebra, v: int, limit: int) -> LocalImage:
    E = L.local(v)
    target = image_target_dim(L, v)
    span = f2.Echelon()
    gens: list[tuple[str, int]] = []
    for h in local_factors(L, v):
        vec = delta_of_two_torsion(L, v, h)
        if span.add(vec):
            gens.append((_factor_label(h), vec))
    if len(span) > target:
        raise DescentFailure(f"2-torsion image at {place_name(v)} exceeds dimension {target}")
    for x0 in _scan_order(limit):
        if len(span) == target:
            break
        if not is_local_x_coordinate(L, x0, v):
            continue
        vec = L.x_minus_T(x0).res(E)
        if span.add(vec):
            gens.append((f"x-{x0}" if x0 >= 0 else f"x+{-x0}", vec))
    if len(span) != target:
        raise DescentFailure(
            f"local image at {place_name(v)} reached dimension {len(span)} of {target}",
            [g for _, g in gens],
        )
    return LocalImage(v, E, two_torsion_dim(L, v), target, [g for _, g in gens], gens)


def local_image(L: EtaleAlgebra, v: int, limit: int = SCAN_LIMIT) -> LocalImage:
    return _local_image(L, v, limit)


# ---------------------------------------------------------------- Selmer group


def theorem_case(p: int, j: int) -> bool:
    return (j == 1 and p % 16 == 13) or (j == 3 and p % 16 == 5)


@dataclass
class SelmerCertificate:
    p: int
    j: int
    kernel_basis: list[str]
    image_dims: dict[str, int]
    two_torsion_dims: dict[str, int]
    local_generators: dict[str, list[str]]
    selmer_basis: list[str]
    dim: int
    rational_two_torsion_dim: int
    rank_bound: int
    torsion_in_selmer: bool
    guaranteed: bool

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "j": self.j,
            "kernel_basis": list(self.kernel_basis),
            "two_torsion_dims": dict(self.two_torsion_dims),
            "image_dims": dict(self.image_dims),
            "local_generators": {k: list(v) for k, v in self.local_generators.items()},
            "selmer_basis": list(self.selmer_basis),
            "selmer_dim": self.dim,
            "rational_two_torsion_dim": self.rational_two_torsion_dim,
            "rank_bound": self.rank_bound,
            "torsion_in_selmer": self.torsion_in_selmer,
            "guaranteed": self.guaranteed,
        }


@dataclass(frozen=True)
class SelmerComputation:
    L: EtaleAlgebra
    kernel: KernelOfNorm
    images: dict
    combinations: tuple[int, ...]
    basis: tuple[GlobalSquareClass, ...]


def residual_vector(alpha: GlobalSquareClass, images: dict) -> int:
    """Concatenated res_v(alpha) modulo Im(delta_v) over all places; zero iff alpha is Selmer."""
    blocks = []
    for v, img in images.items():
        blocks.append((img.reducer().reduce(alpha.res(img.etale)), img.etale.dim))
    return f2.concat(blocks)


def compute_selmer(L: EtaleAlgebra) -> SelmerComputation:
    ker = ker_norm_basis(L)
    images = {v: local_image(L, v) for v in L.places}
    residuals = [residual_vector(alpha, images) for alpha in ker.basis]
    combos = tuple(f2.kernel(residuals))
    basis = tuple(
        product_of((ker.basis[i] for i in range(len(ker.basis)) if (c >> i) & 1), L) for c in combos
    )
    return SelmerComputation(L, ker, images, combos, basis)


def selmer_group(p: int, j: int) -> SelmerCertificate:
    L = EtaleAlgebra.for_prime(p, j)
    comp = compute_selmer(L)
    ls2 = comp.kernel.ls2
    sel_coords = [ls2.coords(x) for x in comp.basis]
    torsion_ok = all(f2.in_span(ls2.coords(t), sel_coords) for t in rational_two_torsion(L))
    dim_q = two_torsion_dim(L, None)
    names = {v: place_name(v) for v in L.places}
    return SelmerCertificate(
        p=p,
        j=j,
        kernel_basis=[str(x) for x in comp.kernel.basis],
        image_dims={names[v]: img.dim for v, img in comp.images.items()},
        two_torsion_dims={names[v]: img.two_torsion_dim for v, img in comp.images.items()},
        local_generators={names[v]: [g for g, _ in img.generators] for v, img in comp.images.items()},
        selmer_basis=[str(x) for x in comp.basis],
        dim=len(comp.basis),
        rational_two_torsion_dim=dim_q,
        rank_bound=len(comp.basis) - dim_q,
        torsion_in_selmer=torsion_ok,
        guaranteed=theorem_case(p, j),
    )


# ---------------------------------------------------------------- independence audit

# x-coordinate of the second non-torsion 2-adic point, keyed by (j, p mod 32)
_SECOND_TWO_ADIC_POINT = {(1, 13): 5, (1, 29): 13, (3, 5): 13, (3, 21): 5}


def reference_kernel_list(L: EtaleAlgebra, p: int, j: int) -> list[GlobalSquareClass]:
    """The fixed list of eight kernel generators in terms of eps, eps' and T2, T3."""
    eps = fundamental_unit(L.field(L.a))
    eps3 = fundamental_unit(L.field(L.b))
    T3 = L.T3 if j == 1 else L.T3 / p
    return [
        L.triple(1, 1, -1),
        L.triple(1, 1, 2),
        L.triple(1, -1, 1),
        L.triple(1, eps, eps3),
        L.triple(1, 2, 1),
        L.triple(-1, eps, 1),
        L.triple(2, L.T2, T3),
        L.triple(-p, L.T2, 1),
    ]


@dataclass
class IndependenceAudit:
    p: int
    j: int
    labels: list[str]
    rank: int
    relation: list[str]
    t1_matches: bool
    t2_matches: bool
    t1_in_h: list[str] | None
    t2_in_h: list[str] | None

    @property
    def ok(self) -> bool:
        return self.rank == len(self.labels) and self.t1_matches and self.t2_matches

    def __bool__(self) -> bool:
        return self.ok


def independence_audit(p: int, j: int) -> IndependenceAudit:
    key = (j, p % 32)
    if not theorem_case(p, j) or key not in _SECOND_TWO_ADIC_POINT:
        raise ValueError(f"no reference element lists for p={p}, j={j}")
    L = EtaleAlgebra.for_prime(p, j)
    places = (2, p, INF)
    widths = [L.local(v).dim for v in places]

    def at(v: int, vec: int) -> int:
        return f2.concat([(vec if w == v else 0, n) for w, n in zip(places, widths)])

    def res_S(alpha: GlobalSquareClass) -> int:
        return f2.concat([(alpha.res(L.local(v)), n) for v, n in zip(places, widths)])

    t1, t2 = rational_two_torsion(L)
    x4 = _SECOND_TWO_ADIC_POINT[key]
    for x0 in (6, x4):
        if not is_local_x_coordinate(L, x0, 2):
            raise DescentFailure(f"x={x0} is not the x-coordinate of a 2-adic point")
    d = {
        "d1": at(2, t1.res(L.local(2))),
        "d2": at(2, t2.res(L.local(2))),
        "d3": at(2, L.x_minus_T(6).res(L.local(2))),
        "d4": at(2, L.x_minus_T(x4).res(L.local(2))),
        "d5": at(p, t1.res(L.local(p))),
        "d6": at(p, t2.res(L.local(p))),
        "d7": at(INF, delta_of_two_torsion(L, INF, frozenset([ZERO_ROOT]))),
        "d8": at(INF, delta_of_two_torsion(L, INF, frozenset([(-1, L.a)]))),
    }
    h = {f"h{k + 1}": res_S(x) for k, x in enumerate(reference_kernel_list(L, p, j))}
    named = {k: d[k] for k in ("d3", "d4", "d5", "d6", "d7", "d8")} | h
    labels = list(named)
    vectors = list(named.values())
    rel = f2.kernel(vectors)
    relation = [labels[i] for i in range(len(labels)) if rel and (rel[0] >> i) & 1]

    def in_h(vec: int) -> list[str] | None:
        c = f2.express(vec, list(h.values()))
        return None if c is None else [f"h{i + 1}" for i in range(8) if (c >> i) & 1]

    return IndependenceAudit(
        p=p,
        j=j,
        labels=labels,
        rank=f2.rank(vectors),
        relation=relation,
        t1_matches=res_S(t1) == d["d1"] ^ d["d5"] ^ d["d7"],
        t2_matches=res_S(t2) == d["d2"] ^ d["d6"] ^ d["d7"] ^ d["d8"],
        t1_in_h=in_h(res_S(t1)),
        t2_in_h=in_h(res_S(t2)),
    )
