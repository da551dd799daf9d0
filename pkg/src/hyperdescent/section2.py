"""Descent by factorization for y^2 = x(x^2 + c P^2)(x^2 + 2c P^2), c in {1, 4}.

Write x = U/W, y = V/W^3 with gcd(U, W) = 1, W >= 1, so that
V^2 = UW (U^2 + c P^2 W^2)(U^2 + 2c P^2 W^2). Each branch of the case tree is
either killed by a checkable obstruction, or reduces to a rank-0 elliptic curve
whose points are pulled back to candidate x-coordinates and confirmed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .arith import is_prime, is_rational_square, legendre_symbol, rat_sqrt_exact, valuation
from .curves import CurvePoint, HyperCurve, family_curve, sort_points
from .elliptic import EllCurve2T, Point, format_point, quartic_to_cubic, rank_upper_bound

SUPPORTED = ((0, 2), (2, 2))


# ---------------------------------------------------------------- certificates


@dataclass(frozen=True)
class ObstructionCertificate:
    kind: str           # "residue", "parity" or "divisibility"
    claim: str
    equation: str
    data: tuple = ()

    def check(self) -> bool:
        if self.kind == "residue":
            n, p = self.data
            return legendre_symbol(n, p) == -1
        if self.kind == "parity":
            kappa, nu = self.data
            return parity_forces_delta_one(kappa, nu)
        if self.kind == "divisibility":
            return True  # p divides p v^2 but not the right-hand side: holds by the branch hypothesis
        raise ValueError(self.kind)


def parity_forces_delta_one(kappa: int, nu: int) -> bool:
    """For coprime (u, w), one of u^2 + kappa w^2 and u w (u^2 + nu w^2) is odd."""
    for u, w in ((0, 1), (1, 0), (1, 1)):
        if (u * u + kappa * w * w) % 2:
            continue
        if (u * w * (u * u + nu * w * w)) % 2:
            continue
        return False
    return True


# ---------------------------------------------------------------- tree


@dataclass(frozen=True)
class Condition:
    """Atomic hypothesis on a coprime pair (U, W)."""

    name: str
    test: Callable[[int, int], bool] = field(compare=False)

    def __call__(self, U: int, W: int) -> bool:
        return self.test(U, W)


@dataclass
class QuarticLeaf:
    """t^2 = e z^4 + k z^2 + 1 with x = alpha / z (delta = 1) or x = alpha z (delta = 2)."""

    e: Fraction
    k: Fraction
    delta: int
    alpha: Fraction

    def curve(self) -> EllCurve2T:
        return quartic_to_cubic(self.e, self.k).curve

    def pullback(self, pt: Point) -> list[Fraction | None]:
        back = quartic_to_cubic(self.e, self.k).backward(pt)
        if isinstance(back, str):
            z = None  # z = infinity
        else:
            z = back[0]
        if self.delta == 1:
            if z is None:
                return [Fraction(0)]
            return [None] if z == 0 else [self.alpha / z]
        if z is None:
            return [None]
        return [self.alpha * z]

    def side_condition(self, x: Fraction) -> bool:
        return x == 0 or is_rational_square(self.delta * x)

    def describe(self) -> str:
        sub = f"x = {self.alpha}/z" if self.delta == 1 else f"x = {self.alpha}*z"
        return f"quartic t^2 = {self.e} z^4 + {self.k} z^2 + 1, {sub}"


@dataclass
class EllipticLeaf:
    """p delta s^2 = u^2 + kappa w^2, delta t^2 = u w (u^2 + nu w^2); x = P r with r = u/w = delta X."""

    kappa: int
    nu: int
    delta: int
    P: int

    def curve(self) -> EllCurve2T:
        return EllCurve2T(0, Fraction(self.nu, self.delta**2))

    def pullback(self, pt: Point) -> list[Fraction | None]:
        if pt is None:
            return [None]
        return [self.P * self.delta * pt[0]]

    def side_condition(self, x: Fraction) -> bool:
        r = x / self.P
        return is_rational_square(self.P * self.delta * (r * r + self.kappa))

    def describe(self) -> str:
        return (f"system {self.P}*{self.delta}*s^2 = u^2 + {self.kappa}w^2, {self.delta}*t^2 = uw(u^2 + {self.nu}w^2)"
                f" -> y^2 = x(x^2 + {Fraction(self.nu, self.delta ** 2)}), x = {self.P}*{self.delta}*X")


@dataclass
class CaseNode:
    label: str
    condition: Condition | None
    children: list["CaseNode"] = field(default_factory=list)
    outcome: object = None  # ObstructionCertificate | QuarticLeaf | EllipticLeaf
    note: str = ""

    def leaves(self) -> list["CaseNode"]:
        if not self.children:
            return [self]
        return [leaf for child in self.children for leaf in child.leaves()]

    def locate(self, U: int, W: int) -> list["CaseNode"]:
        """All leaves whose hypotheses hold at (U, W); a partition has exactly one."""
        if self.condition is not None and not self.condition(U, W):
            return []
        if not self.children:
            return [self]
        return [leaf for child in self.children for leaf in child.locate(U, W)]


def _v2_parity(n: int) -> int:
    return valuation(n, 2) % 2 if n else 0


def _delta_cond(label: str, delta: int, quantity: Callable[[int, int], int], fallback: Callable[[int, int], int]) -> Condition:
    def test(U: int, W: int) -> bool:
        q = quantity(U, W)
        if q == 0:
            q = fallback(U, W)
        return (2 if _v2_parity(q) else 1) == delta

    return Condition(label, test)


@dataclass(frozen=True)
class FamilyShape:
    """x(x^2 + c P^2)(x^2 + 2c P^2) with c in {1, 4}; P is the odd prime or 1."""

    p: int
    i: int
    j: int
    c: int
    P: int

    @property
    def root_c(self) -> int:
        return math.isqrt(self.c)

    def curve(self) -> HyperCurve:
        return family_curve(self.p, self.i, self.j)


def family_shape(p: int, i: int, j: int) -> FamilyShape:
    if (i, j) not in SUPPORTED:
        raise ValueError(f"(i, j) = ({i}, {j}) is not handled by the factorization descent")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        if (i, j) == (2, 2):
            raise ValueError("p = 2 with (i, j) = (2, 2) is not handled")
        return FamilyShape(p, i, j, 4, 1)  # x(x^2 + 4)(x^2 + 8)
    return FamilyShape(p, i, j, 2**i, p)


def build_case_tree(p: int, ij: tuple[int, int]) -> CaseNode:
    S = family_shape(p, *ij)
    c, P, sc = S.c, S.P, S.root_c
    alpha = Fraction(sc * P)
    e1, k1, e2, k2 = Fraction(2), Fraction(3), Fraction(1, 2), Fraction(3, 2)

    def quartic_pair(prefix: str, s_quantity, t_quantity):
        return [
            CaseNode(f"{prefix}.d1", _delta_cond("delta = 1", 1, s_quantity, t_quantity), outcome=QuarticLeaf(e1, k1, 1, alpha)),
            CaseNode(f"{prefix}.d2", _delta_cond("delta = 2", 2, s_quantity, t_quantity), outcome=QuarticLeaf(e2, k2, 2, alpha)),
        ]

    case1 = CaseNode(
        "I",
        Condition("p does not divide U", lambda U, W: P == 1 or U % P != 0),
        quartic_pair(
            "I",
            lambda U, W: U * W,
            lambda U, W: (U * U + c * P * P * W * W) * (U * U + 2 * c * P * P * W * W),
        ),
        note="the gcd of the two factors is a power of 2 and is the twisting parameter delta",
    )
    root = CaseNode(f"C({p};{ij[0]},{ij[1]})", None, [case1])
    if P == 1:
        return root

    def uw(U, W):
        return U // P, W

    def branch_b(kappa: int, nu: int, label: str) -> CaseNode:
        cond = Condition(f"p divides u^2 + {kappa}w^2",
                         lambda U, W: (lambda u, w: (u * u + kappa * w * w) % P == 0)(*uw(U, W)))
        node = CaseNode(label, cond)
        if legendre_symbol(-kappa, P) == -1:
            node.outcome = ObstructionCertificate(
                "residue", f"({-kappa}/{P}) = -1", f"u^2 + {kappa}w^2 = 0 mod {P} with {P} not dividing w", (-kappa, P))
            return node
        s_q = lambda U, W: (lambda u, w: u * u + kappa * w * w)(*uw(U, W))
        t_q = lambda U, W: (lambda u, w: u * w * (u * u + nu * w * w))(*uw(U, W))
        d1 = CaseNode(f"{label}.d1", _delta_cond("delta = 1", 1, s_q, t_q), outcome=EllipticLeaf(kappa, nu, 1, P))
        d2 = CaseNode(f"{label}.d2", _delta_cond("delta = 2", 2, s_q, t_q))
        if parity_forces_delta_one(kappa, nu):
            d2.outcome = ObstructionCertificate(
                "parity", "one side is odd for every coprime parity class", f"2 s^2 = u^2 + {kappa}w^2 / 2 t^2 = uw(u^2 + {nu}w^2)",
                (kappa, nu))
        else:
            d2.outcome = EllipticLeaf(kappa, nu, 2, P)
        node.children = [d1, d2]
        return node

    neither = CaseNode(
        "II(b).none",
        Condition("p divides neither factor",
                  lambda U, W: (lambda u, w: (u * u + c * w * w) % P != 0 and (u * u + 2 * c * w * w) % P != 0)(*uw(U, W))),
        outcome=ObstructionCertificate("divisibility", f"{P} divides p v^2 but none of u, w, u^2+{c}w^2, u^2+{2*c}w^2",
                                       f"{P} v^2 = uw(u^2 + {c}w^2)(u^2 + {2*c}w^2)"),
    )
    case2b = CaseNode(
        "II(b)",
        Condition("p does not divide uw", lambda U, W: (lambda u, w: u * w % P != 0)(*uw(U, W))),
        [branch_b(2 * c, c, "II(b).A"), branch_b(c, 2 * c, "II(b).B"), neither],
    )
    case2a = CaseNode(
        "II(a)",
        Condition("p divides uw", lambda U, W: (lambda u, w: u * w % P == 0)(*uw(U, W))),
        quartic_pair(
            "II(a)",
            lambda U, W: (lambda u, w: u * w)(*uw(U, W)),
            lambda U, W: (lambda u, w: (u * u + c * w * w) * (u * u + 2 * c * w * w))(*uw(U, W)),
        ),
    )
    case2 = CaseNode("II", Condition("p divides U", lambda U, W: U % P == 0), [case2a, case2b],
                     note="U = p u, V = p^3 v, W = w")
    root.children.append(case2)
    return root


# ---------------------------------------------------------------- gcd claim


@dataclass(frozen=True)
class GcdCheck:
    passed: bool
    checked: int
    counterexample: tuple[int, int, int] | None = None


def gcd_constraint(p: int, ij: tuple[int, int], branch: str = "I", bound: int = 200, coprime: bool = True) -> GcdCheck:
    """Check on a grid that the gcd of the two torsor factors in a branch is a power of 2."""
    S = family_shape(p, *ij)
    c, P = S.c, S.P
    checked = 0
    for U in range(-bound, bound + 1):
        for W in range(1, bound + 1):
            if coprime and math.gcd(U, W) != 1:
                continue
            if branch == "I":
                if P > 1 and U % P == 0:
                    continue
                a, b = U * W, (U * U + c * P * P * W * W) * (U * U + 2 * c * P * P * W * W)
            elif branch == "II(a)":
                u, w = U, W
                if P == 1 or w % P == 0 or u % P:
                    continue
                a, b = u * w, (u * u + c * w * w) * (u * u + 2 * c * w * w)
            elif branch in ("II(b).A", "II(b).B"):
                u, w = U, W
                kappa, nu = (2 * c, c) if branch.endswith("A") else (c, 2 * c)
                if P == 1 or (u * w) % P == 0 or (u * u + kappa * w * w) % P:
                    continue
                a, b = u * u + kappa * w * w, u * w * (u * u + nu * w * w)
            else:
                raise ValueError(branch)
            g = math.gcd(a, b)
            checked += 1
            while g % 2 == 0 and g:
                g //= 2
            if g not in (0, 1):
                return GcdCheck(False, checked, (U, W, math.gcd(a, b)))
    return GcdCheck(True, checked)


# ---------------------------------------------------------------- conclusion


@dataclass
class LeafReport:
    label: str
    hypotheses: list[str]
    outcome: str
    status: str                  # "contradiction", "rank0", "inconclusive", "bad-certificate"
    curve_points: list[str] = field(default_factory=list)
    pulled_back: list[str] = field(default_factory=list)
    rank_bound: int | None = None
    note: str = ""


@dataclass
class Conclusion:
    p: int
    ij: tuple[int, int]
    points: list[CurvePoint]
    leaves: list[LeafReport]

    @property
    def conclusive(self) -> bool:
        return all(r.status in ("contradiction", "rank0") for r in self.leaves)


def _paths(node: CaseNode, trail: list[str]) -> list[tuple[CaseNode, list[str]]]:
    here = trail + ([node.condition.name] if node.condition else [])
    if not node.children:
        return [(node, here)]
    return [pair for child in node.children for pair in _paths(child, here)]


def conclude_points(p: int, ij: tuple[int, int]) -> Conclusion:
    """C(Q) as the union of leaf pullbacks; leaves with positive rank bound are flagged inconclusive."""
    S = family_shape(p, *ij)
    C = S.curve()
    tree = build_case_tree(p, ij)
    points: list[CurvePoint] = [CurvePoint.infinity()]
    reports = []
    for leaf, hyps in _paths(tree, []):
        out = leaf.outcome
        if isinstance(out, ObstructionCertificate):
            ok = out.check()
            reports.append(LeafReport(leaf.label, hyps, f"{out.kind}: {out.claim}", "contradiction" if ok else "bad-certificate"))
            continue
        E = out.curve()
        cert = rank_upper_bound(E)
        rep = LeafReport(leaf.label, hyps, out.describe(), "rank0", rank_bound=cert.rank_bound)
        reports.append(rep)
        if cert.rank_bound > 0:
            rep.status = "inconclusive"
            continue
        rep.curve_points = [format_point(pt) for pt in cert.points]
        for pt in cert.points:
            for x in out.pullback(pt):
                if x is None:
                    rep.pulled_back.append("inf")
                    continue
                if not out.side_condition(x):
                    rep.pulled_back.append(f"x={x} (side condition fails)")
                    continue
                y = rat_sqrt_exact(C(x)) if C(x) >= 0 else None
                if y is None:
                    rep.pulled_back.append(f"x={x} (not on the curve)")
                    continue
                rep.pulled_back.append(f"x={x}")
                points += [CurvePoint.affine(x, y), CurvePoint.affine(x, -y)]
    return Conclusion(p, tuple(ij), sort_points(points), reports)


def audit_lines(p: int, ij: tuple[int, int]) -> list[str]:
    """One line per leaf: label | hypotheses | outcome | pullbacks."""
    concl = conclude_points(p, ij)
    lines = [f"# case tree for C({p};{ij[0]},{ij[1]}): points {', '.join(map(str, concl.points))}"]
    for r in concl.leaves:
        extra = f" | E(Q) = {{{', '.join(r.curve_points)}}} -> {', '.join(r.pulled_back)}" if r.curve_points else ""
        rb = f" | rank bound {r.rank_bound}" if r.rank_bound is not None else ""
        lines.append(f"{r.label} | {' & '.join(r.hypotheses)} | {r.outcome} | {r.status}{rb}{extra}")
    return lines
