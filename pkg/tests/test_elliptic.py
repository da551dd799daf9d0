from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from hyperdescent.elliptic import (
    EllCurve2T,
    Torsor,
    add_points,
    format_point,
    locally_solvable,
    multiply,
    point_order,
    quartic_to_cubic,
    rank_upper_bound,
    rational_points_rank0,
    RankNotZero,
    squarefree_divisors,
    torsion_group,
)

F = Fraction

SIX_CURVES = [
    ("quartic e=2 k=3", quartic_to_cubic(2, 3).curve, {None, (F(-3), F(0))}),
    ("quartic e=1/2 k=3/2", quartic_to_cubic(F(1, 2), F(3, 2)).curve, {None, (F(-3, 2), F(0))}),
    ("u(u^2+1)", EllCurve2T(0, 1), {None, (F(0), F(0))}),
    ("u(u^2+1/4)", EllCurve2T(0, F(1, 4)), {None, (F(0), F(0)), (F(1, 2), F(1, 2)), (F(1, 2), F(-1, 2))}),
    ("u(u^2+2)", EllCurve2T(0, 2), {None, (F(0), F(0))}),
    ("u(u^2+4)", EllCurve2T(0, 4), {None, (F(0), F(0)), (F(2), F(4)), (F(2), F(-4))}),
]


@pytest.mark.parametrize("name,E,expected", SIX_CURVES, ids=[c[0] for c in SIX_CURVES])
def test_six_rank_zero_curves(name, E, expected):
    cert = rank_upper_bound(E)
    assert cert.rank_bound == 0 and not cert.flags
    assert set(cert.points) == expected
    assert set(rational_points_rank0(E)) == expected


def test_quartic_curves_in_user_coordinates():
    assert quartic_to_cubic(2, 3).curve.cubic() == (F(-24), F(-8), F(3), F(1))
    assert quartic_to_cubic(F(1, 2), F(3, 2)).curve.cubic() == (F(-3), F(-2), F(3, 2), F(1))


# y^2 = x^3 - n^2 x has rank 1 exactly when n is congruent; small cases are settled
CONGRUENT = {1: 0, 2: 0, 3: 0, 5: 1, 6: 1, 7: 1, 10: 0, 11: 0, 13: 1, 14: 1, 15: 1}


@pytest.mark.parametrize("n", sorted(CONGRUENT))
def test_congruent_number_ranks(n):
    cert = rank_upper_bound(EllCurve2T(0, -n * n))
    assert cert.rank_bound == CONGRUENT[n]
    assert len(cert.torsion.points) == 4


def test_positive_rank_refuses_point_list():
    with pytest.raises(RankNotZero):
        rational_points_rank0(EllCurve2T(0, -25))


def test_torsion_structures():
    assert torsion_group(EllCurve2T(0, 4)).structure == "Z/4"
    assert torsion_group(EllCurve2T(0, -1)).structure == "Z/2 x Z/2"
    # y^2 = x^3 + 1, written around its 2-torsion point x = -1
    six = EllCurve2T(-3, 3, shift=1)
    tors = torsion_group(six)
    assert tors.structure == "Z/6"
    assert set(tors.points) == {None, (F(-1), F(0)), (F(0), F(1)), (F(0), F(-1)), (F(2), F(3)), (F(2), F(-3))}


RANK_ONE = EllCurve2T(0, -25)  # generator (-4, 6)
multiples = [multiply(RANK_ONE, k, (F(-4), F(6))) for k in range(1, 5)]
group_elements = multiples + [(F(0), F(0)), (F(5), F(0)), (F(-5), F(0)), None]


@given(st.sampled_from(group_elements), st.sampled_from(group_elements), st.sampled_from(group_elements))
def test_group_law(P1, P2, P3):
    E = RANK_ONE
    assert E.contains(add_points(E, P1, P2))
    assert add_points(E, P1, P2) == add_points(E, P2, P1)
    assert add_points(E, add_points(E, P1, P2), P3) == add_points(E, P1, add_points(E, P2, P3))


def test_orders_and_formatting():
    E = EllCurve2T(0, 4)
    assert point_order(E, (F(2), F(4))) == 4
    assert point_order(RANK_ONE, (F(-4), F(6))) is None
    assert format_point(None) == "inf" and format_point((F(1, 2), F(-1, 2))) == "(1/2,-1/2)"


def brute_has_point(T: Torsor, bound: int = 30) -> bool:
    for u, v in product(range(-bound, bound + 1), range(0, bound + 1)):
        if (u, v) == (0, 0):
            continue
        val = T.d * u**4 + T.a * u * u * v * v + T.e * v**4
        if val >= 0 and int(val**0.5 + 0.5) ** 2 == val:
            return True
    return False


@pytest.mark.parametrize("a,b", [(0, -25), (0, -36), (0, 4), (0, 2), (-6, 1), (2, -3), (0, -49)])
def test_global_points_imply_local_solvability(a, b):
    for d in squarefree_divisors(b):
        T = Torsor(d, a, b)
        if brute_has_point(T):
            assert all(locally_solvable(T, q) for q in (0, 2, 3, 5, 7, 13))


def test_real_solvability():
    assert not locally_solvable(Torsor(-1, 0, 4), 0)  # -u^4 - 4v^4 < 0
    assert locally_solvable(Torsor(-1, 5, 4), 0)


def test_quartic_transform_round_trip():
    qc = quartic_to_cubic(F(1, 2), F(3, 2))
    for z in [F(n, d) for n in range(-6, 7) for d in range(1, 5)]:
        val = qc.quartic.e * z**4 + qc.quartic.k * z * z + 1
        n, d = val.numerator, val.denominator
        if n < 0 or int(n**0.5) ** 2 != n or int(d**0.5) ** 2 != d:
            continue
        t = F(int(n**0.5), int(d**0.5))
        for tt in (t, -t):
            pt = qc.forward(z, tt)
            assert qc.curve.contains(pt)
            assert qc.backward(pt) == (z, tt)
    with pytest.raises(ValueError):
        quartic_to_cubic(1, 2)
