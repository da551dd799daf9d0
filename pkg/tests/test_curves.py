from fractions import Fraction
from math import gcd, isqrt

import pytest
from hypothesis import given, strategies as st

from hyperdescent import poly as P
from hyperdescent.arith import primes_in_range
from hyperdescent.curves import (
    CANONICAL,
    REDUCED_IMAGE_SCALING,
    RICHELOT_FAMILY_SCALING,
    CurvePoint,
    HyperCurve,
    QuadTriple,
    family_curve,
    family_poly,
    family_triple,
    lutz_nagell_candidates,
    normalize_family,
    reduced_richelot_image,
    richelot,
    richelot_family_image,
    search_points,
    verify_monomial_map,
)


def pts(*pairs):
    out = [CurvePoint.infinity()]
    for x, y in pairs:
        out.append(CurvePoint.affine(x, y))
        if y:
            out.append(CurvePoint.affine(x, -y))
    return set(out)


@given(st.fractions(max_denominator=30).filter(bool))
def test_richelot_of_family_by_hand(A):
    # by hand: H = (2A x, x^2 - 2A, A - x^2), Delta = -A
    img = richelot(family_triple(A))
    assert img.delta == -A
    assert img.H == (P.poly([0, 2 * A]), P.poly([-2 * A, 0, 1]), P.poly([A, 0, -1]))
    assert img.curve.f == P.scale(family_poly(-A, -2 * A), 2)


@pytest.mark.parametrize("ij", [(2, 1), (2, 3)])
def test_richelot_image_matches_for_small_primes(ij):
    for p in primes_in_range(2, 100):
        A = Fraction(2) ** ij[0] * Fraction(p) ** ij[1]
        raw = richelot(family_triple(A)).curve
        target = richelot_family_image(p, *ij)
        assert target.f == family_poly(-(2 ** (ij[0] + 2)) * Fraction(p) ** ij[1], -(2 ** (ij[0] + 3)) * Fraction(p) ** ij[1])
        assert verify_monomial_map(raw, target, RICHELOT_FAMILY_SCALING, p)
        if p > 2:
            assert verify_monomial_map(target, reduced_richelot_image(p, *ij), REDUCED_IMAGE_SCALING, p)


def test_degenerate_richelot_rejected():
    with pytest.raises(ValueError):
        richelot(QuadTriple(P.X, P.X, P.poly([1, 0, 1])))


@pytest.mark.parametrize("i", range(-4, 8))
@pytest.mark.parametrize("j", range(-3, 8))
def test_normalization_maps_curve_and_points(i, j):
    norm = normalize_family(i, j)
    assert norm.target in CANONICAL or norm.target[1] == 0
    for p in (3, 5, 17):
        src, tgt = family_curve(p, i, j), family_curve(p, *norm.target)
        assert verify_monomial_map(src, tgt, norm.map, p)
        # (0,0) and infinity are swapped or fixed, never lost
        images = {norm.apply(pt, p) for pt in (CurvePoint.affine(0, 0), CurvePoint.infinity())}
        assert images == {CurvePoint.affine(0, 0), CurvePoint.infinity()}


def test_normalization_carries_sporadic_point():
    # pull (6,216) on C(3;2,2) back to C(3;3,2), then push it forward again
    norm = normalize_family(3, 2)
    assert norm.target == (2, 2)
    back = norm.map.inverse()
    pt = back.apply(CurvePoint.affine(6, 216), 3)
    assert family_curve(3, 3, 2).contains(pt)
    assert norm.apply(pt, 3) == CurvePoint.affine(6, 216)


def brute_search(C: HyperCurve, bound: int):
    out = set(C.points_at_infinity())
    for w in range(1, bound + 1):
        for u in range(-bound, bound + 1):
            if gcd(u, w) != 1:
                continue
            x = Fraction(u, w)
            val = C(x)
            if val < 0:
                continue
            n, d = val.numerator, val.denominator
            rn, rd = isqrt(n), isqrt(d)
            if rn * rn == n and rd * rd == d:
                y = Fraction(rn, rd)
                out |= {CurvePoint.affine(x, y), CurvePoint.affine(x, -y)}
    return out


@pytest.mark.parametrize("p,i,j", [(17, 0, 1), (3, 2, 2), (5, 2, 2), (7, 2, 3), (13, 2, 1), (3, 1, 1)])
def test_search_against_brute_force(p, i, j):
    C = family_curve(p, i, j)
    assert set(search_points(C, 40)) == brute_search(C, 40)


@pytest.mark.parametrize("p,i,j,pt", [
    (17, 0, 1, (8, 252)), (3, 2, 2, (6, 216)), (5, 2, 2, (5, 375)),
    (17, 2, 2, (136, 235824)), (3, 2, 3, (72, 45360)), (7, 2, 3, (98, 115248)),
])
def test_known_sporadic_points(p, i, j, pt):
    found = set(search_points(family_curve(p, i, j), 200))
    assert found == pts((0, 0), pt)


def test_search_independent_of_workers():
    C = family_curve(17, 2, 2)
    assert search_points(C, 150, workers=1) == search_points(C, 150, workers=3)


def test_search_rejects_bad_bound():
    with pytest.raises(ValueError):
        search_points(family_curve(3, 0, 1), 0)


def test_curve_validation_and_round_trip():
    with pytest.raises(ValueError):
        HyperCurve(P.poly([0, 0, 1, 0, 0, 1]))  # x^2 | f
    with pytest.raises(ValueError):
        HyperCurve(P.poly([1, 0, 1]))
    C = family_curve(13, 2, 1)
    assert HyperCurve.deserialize(C.serialize()).f == C.f
    for text in ("inf", "(8,-252)", "(1/2,3/4)"):
        assert str(CurvePoint.parse(text)) == text


@pytest.mark.parametrize("p,j", [(13, 1), (29, 1), (5, 3), (37, 3)])
def test_lutz_nagell_against_integer_scan(p, j):
    C = reduced_richelot_image(p, 2, j)
    disc = int(C.discriminant())
    brute = set()
    for a in range(-3000, 3001):
        v = int(C(a))
        if v < 0:
            continue
        b = isqrt(v)
        if b * b == v and (b == 0 or disc % (b * b) == 0):
            brute |= {CurvePoint.affine(a, b), CurvePoint.affine(a, -b)}
    cands = set(lutz_nagell_candidates(C))
    assert brute <= cands
    assert all(C.contains(c) and (c.y == 0 or disc % (c.y.numerator ** 2) == 0) for c in cands)
    assert CurvePoint.affine(0, 0) in cands


def test_lutz_nagell_needs_integral_monic_odd_model():
    with pytest.raises(ValueError):
        lutz_nagell_candidates(HyperCurve(P.poly([1, 0, 0, 0, 0, 0, 1])))
    with pytest.raises(ValueError):
        lutz_nagell_candidates(HyperCurve(P.scale(family_poly(1, 2), Fraction(1, 2))))
