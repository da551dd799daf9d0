"""Jacobian 2-descent checked against independent computations.

The local images are checked in two directions. Literal triples must land inside them.
So must the x - T classes of many further local points, since a group image is
closed under those. The Selmer group is cross-checked by enumerating all 256 kernel
combinations directly.
"""

from fractions import Fraction
from functools import reduce
from math import isqrt, prod, sqrt

import pytest
from hypothesis import given, strategies as st

from hyperdescent import f2
from hyperdescent.arith import INF, is_square_local, primes_in_range
from hyperdescent.quadfield import QuadElt, fundamental_unit
from hyperdescent.selmer import (
    ZERO_ROOT,
    DescentFailure,
    EtaleAlgebra,
    compute_selmer,
    delta_global,
    delta_of_two_torsion,
    independence_audit,
    is_local_x_coordinate,
    ker_norm_basis,
    local_factors,
    local_image,
    rational_two_torsion,
    reference_kernel_list,
    residual_vector,
    selmer_group,
    theorem_case,
    two_torsion_dim,
)

CASE3 = [p for p in primes_in_range(2, 500) if p % 16 == 13]
CASE4 = [p for p in primes_in_range(2, 500) if p % 16 == 5]
TABLE_PRIMES = [(13, 1), (29, 1), (5, 3), (37, 3)]
ALL_CASES = [(p, 1) for p in CASE3] + [(p, 3) for p in CASE4]


def algebra(p, j):
    return EtaleAlgebra.for_prime(p, j)


def same_class(L, x, y) -> bool:
    ls2 = ker_norm_basis(L).ls2
    return ls2.coords(x) == ls2.coords(y)


def test_case_membership():
    assert CASE3[:4] == [13, 29, 61, 109] and CASE4[:4] == [5, 37, 53, 101]
    assert theorem_case(13, 1) and theorem_case(5, 3) and not theorem_case(13, 3)


@pytest.mark.parametrize("p,j", TABLE_PRIMES)
def test_kernel_of_norm_matches_reference_list(p, j):
    L = algebra(p, j)
    ker = ker_norm_basis(L)
    assert ker.ls2.dim == 11 and len(ker.basis) == 8
    ref = reference_kernel_list(L, p, j)
    ref_coords = [ker.ls2.coords(x) for x in ref]
    assert f2.rank(ref_coords) == 8
    for x in ker.basis:
        assert f2.in_span(ker.ls2.coords(x), ref_coords)


def is_square_rational(q: Fraction) -> bool:
    return q >= 0 and isqrt(q.numerator) ** 2 == q.numerator and isqrt(q.denominator) ** 2 == q.denominator


@pytest.mark.parametrize("p,j", TABLE_PRIMES)
def test_norm_kernel_elements_have_square_norm(p, j):
    L = algebra(p, j)
    for x in ker_norm_basis(L).basis + tuple(reference_kernel_list(L, p, j)):
        assert is_square_rational(x.norm())


@pytest.mark.parametrize("p,j", TABLE_PRIMES)
def test_local_dimension_tables(p, j):
    L = algebra(p, j)
    assert [two_torsion_dim(L, v) for v in (2, p, INF)] == [2, 2, 4]
    assert [local_image(L, v).dim for v in (2, p, INF)] == [4, 2, 2]
    assert two_torsion_dim(L, None) == 2


@pytest.mark.parametrize("p,j", TABLE_PRIMES)
def test_two_torsion_images_are_the_tabulated_triples(p, j):
    L = algebra(p, j)
    T2, T3 = L.T2, L.T3
    x = frozenset([ZERO_ROOT])
    pair = frozenset([(1, L.a), (-1, L.a)])
    minus_root = frozenset([(-1, L.a)])
    expected = {
        p: {x: L.triple(2, T2, T3), pair: L.triple(p, T2, p)},
        2: {x: L.triple(2, -T2, -T3), pair: L.triple(3, T2, -3)},
        INF: {x: L.triple(1, -T2, -T3), minus_root: L.triple(-1, -1, -T3)},
    }
    for v, table in expected.items():
        E = L.local(v)
        for h, triple in table.items():
            assert delta_of_two_torsion(L, v, h) == triple.res(E), (v, sorted(h))
    t1, t2 = rational_two_torsion(L)
    assert same_class(L, t1, L.triple(2, -T2, -T3))
    assert same_class(L, t2, L.triple(-p, T2, p))


@pytest.mark.parametrize("p,j", [(13, 1), (5, 3)])
def test_real_images_by_direct_evaluation(p, j):
    # (-1)^deg h (h(t) - (f/h)(t)) evaluated in floating point at each real root t
    L = algebra(p, j)
    real = {r: (r[0] * sqrt(r[1]) if r[0] else 0.0) for r in L.roots}
    for h in local_factors(L, INF):
        bits = []
        for t in L.roots:
            tv = real[t]
            inside = prod(tv - real[r] for r in h)
            outside = prod(tv - real[r] for r in L.roots if r not in h)
            bits.append(int((-1) ** len(h) * (inside - outside) < 0))
        assert delta_of_two_torsion(L, INF, h) == f2.bits_to_int(bits)


@pytest.mark.parametrize("p,j", [(13, 1), (29, 1), (61, 1), (5, 3), (37, 3), (53, 3)])
def test_tabulated_two_adic_generators_lie_in_image(p, j):
    L = algebra(p, j)
    img = local_image(L, 2)
    E = L.local(2)
    assert is_local_x_coordinate(L, 6, 2)
    assert L.x_minus_T(6).res(E) in img
    second = {(1, 13): 5, (1, 29): 13, (3, 5): 13, (3, 21): 5}[(j, p % 32)]
    assert is_local_x_coordinate(L, second, 2)
    literal = L.triple(5, QuadElt(L.a, second, -1), QuadElt(L.b, second, -1))
    assert literal.res(E) in img
    span = f2.Echelon([delta_of_two_torsion(L, 2, h) for h in local_factors(L, 2)])
    for vec in (L.x_minus_T(6).res(E), literal.res(E)):
        assert span.add(vec)


local_x = st.builds(lambda n, d, e: Fraction(n, d) * Fraction(2) ** e,
                    st.integers(-400, 400), st.integers(1, 50), st.integers(-3, 3))


@pytest.mark.parametrize("p,j", [(13, 1), (5, 3)])
@given(x0=local_x)
def test_local_images_contain_every_point(p, j, x0):
    L = algebra(p, j)
    for v in (2, p, INF):
        if is_local_x_coordinate(L, x0, v):
            assert L.x_minus_T(x0).res(L.local(v)) in local_image(L, v)


@pytest.mark.parametrize("p,j", TABLE_PRIMES)
@given(i=st.integers(0, 7), k=st.integers(0, 7))
def test_residue_map_is_a_homomorphism(p, j, i, k):
    L = algebra(p, j)
    ker = ker_norm_basis(L).basis
    for v in (2, p, INF):
        E = L.local(v)
        assert (ker[i] * ker[k]).res(E) == ker[i].res(E) ^ ker[k].res(E)


@pytest.mark.parametrize("p,j", TABLE_PRIMES + [(61, 1), (53, 3)])
def test_selmer_against_exhaustive_kernel_scan(p, j):
    L = algebra(p, j)
    comp = compute_selmer(L)
    ker = comp.kernel.basis
    ls2 = comp.kernel.ls2
    members = set()
    for mask in range(256):
        alpha = reduce(lambda x, y: x * y, (ker[i] for i in range(8) if mask >> i & 1), L.triple(1, 1, 1))
        inside = all(alpha.res(img.etale) in img for img in comp.images.values())
        assert inside == (residual_vector(alpha, comp.images) == 0)
        if inside:
            members.add(ls2.coords(alpha))
    assert len(members) == 4
    t1, t2 = rational_two_torsion(L)
    assert members == {0, ls2.coords(t1), ls2.coords(t2), ls2.coords(t1 * t2)}


@pytest.mark.parametrize("p,j", ALL_CASES)
def test_rank_zero_for_all_theorem_primes(p, j):
    cert = selmer_group(p, j)
    assert cert.dim == 2 and cert.rational_two_torsion_dim == 2 and cert.rank_bound == 0
    assert cert.torsion_in_selmer and cert.guaranteed
    d = cert.to_dict()
    assert d["selmer_dim"] == 2 and d["image_dims"] == {"2": 4, str(p): 2, "inf": 2}


EXPECTED_T1 = {1: ["h1", "h3", "h7"], 3: ["h1", "h2", "h3", "h7"]}


@pytest.mark.parametrize("p,j", [(13, 1), (29, 1), (61, 1), (5, 3), (37, 3), (53, 3)])
def test_independence_audit(p, j):
    audit = independence_audit(p, j)
    assert audit.rank == 14 and audit.ok and bool(audit)
    assert audit.relation == []
    assert audit.t1_in_h == EXPECTED_T1[j]
    assert audit.t2_in_h == ["h2", "h8"]


def test_audit_refuses_other_primes():
    with pytest.raises(ValueError):
        independence_audit(17, 1)


def test_algebra_validation():
    with pytest.raises(ValueError):
        EtaleAlgebra(4, 8)
    with pytest.raises(ValueError):
        EtaleAlgebra(3, 7)
    L = algebra(5, 3)
    assert L.rebase(QuadElt(5, 0, 1), 125) == QuadElt(125, 0, Fraction(1, 5))
    assert L.to_field(L.T2) == QuadElt(5, 0, 5)


def test_non_factor_rejected():
    L = algebra(13, 1)
    with pytest.raises(ValueError):
        delta_of_two_torsion(L, 2, frozenset([(1, 13)]))  # 13 is not a 2-adic square
    with pytest.raises(ValueError):
        delta_global(L, frozenset([(1, 13)]))


def test_scan_exhaustion_is_reported():
    L = algebra(13, 1)
    with pytest.raises(DescentFailure) as info:
        local_image(L, 2, limit=1)
    assert info.value.partial


def test_two_adic_facts_used_by_the_tables():
    for p in CASE3 + CASE4:
        assert not is_square_local(p, 2) and not is_square_local(2 * p, 2)


def real_signs(q, second, third):
    """Local coordinates at infinity from sign pairs at the embeddings (+sqrt c, -sqrt c)."""
    return f2.bits_to_int([int(q < 0)] + [int(s < 0) for s in (*second, *third)])


@pytest.mark.parametrize("p,j", [(13, 1), (29, 1), (61, 1), (5, 3), (37, 3), (53, 3)])
def test_reference_elements_match_tabulated_local_vectors(p, j):
    L = algebra(p, j)
    eps = fundamental_unit(L.field(L.a))
    eps3 = fundamental_unit(L.field(L.b))
    T2, T3 = L.T2, (L.T3 if j == 1 else L.T3 / p)
    one = L.triple(1, 1, 1)
    # (at 2, at p, signs at infinity)
    table = [
        (L.triple(1, 1, -1), one, (1, (1, 1), (-1, -1))),
        (L.triple(1, 1, 2), L.triple(1, 1, 2), (1, (1, 1), (1, 1))),
        (L.triple(1, -1, 1), one, (1, (-1, -1), (1, 1))),
        (L.triple(1, eps, eps3), L.triple(1, eps, eps3), (1, (1, -1), (1, -1))),
        (L.triple(1, 2, 1), L.triple(1, 2, 1), (1, (1, 1), (1, 1))),
        (L.triple(-1, eps, 1), L.triple(1, eps, 1), (-1, (1, -1), (1, 1))),
        (L.triple(2, T2, T3), L.triple(2, T2, T3), (1, (1, -1), (1, -1))),
        (L.triple(3, T2, 1), L.triple(p, T2, 1), (-1, (1, -1), (1, 1))),
    ]
    for h, (at2, atp, signs) in zip(reference_kernel_list(L, p, j), table):
        assert h.res(L.local(2)) == at2.res(L.local(2))
        assert h.res(L.local(p)) == atp.res(L.local(p))
        assert h.res(L.local(INF)) == real_signs(*signs)
