from itertools import product

from hypothesis import given, strategies as st

from hyperdescent import f2

vectors = st.lists(st.integers(min_value=0, max_value=(1 << 12) - 1), max_size=10)


def span_brute(vecs):
    out = set()
    for bits in product((0, 1), repeat=len(vecs)):
        acc = 0
        for b, v in zip(bits, vecs):
            if b:
                acc ^= v
        out.add(acc)
    return out


@given(vectors)
def test_rank_is_log_of_span(vecs):
    assert 1 << f2.rank(vecs) == len(span_brute(vecs))


@given(vectors)
def test_kernel_dimension_and_relations(vecs):
    ker = f2.kernel(vecs)
    assert len(ker) == len(vecs) - f2.rank(vecs)
    for comb in ker:
        acc = 0
        for i, v in enumerate(vecs):
            if (comb >> i) & 1:
                acc ^= v
        assert acc == 0
    assert f2.rank(ker) == len(ker)


@given(vectors, st.integers(min_value=0, max_value=(1 << 12) - 1))
def test_express_and_membership(vecs, target):
    inside = target in span_brute(vecs)
    assert f2.in_span(target, vecs) == inside
    comb = f2.express(target, vecs)
    assert (comb is not None) == inside
    if comb is not None:
        acc = 0
        for i, v in enumerate(vecs):
            if (comb >> i) & 1:
                acc ^= v
        assert acc == target


@given(vectors)
def test_echelon_reduction_is_linear(vecs):
    ech = f2.Echelon(vecs)
    for a, b in [(3, 5), (1 << 11, 77), (4095, 1)]:
        assert ech.reduce(a ^ b) == ech.reduce(a) ^ ech.reduce(b)
    assert f2.span_equal(vecs, ech.basis())


def test_bit_helpers():
    assert f2.bits_to_int((1, 0, 1)) == 5
    assert f2.int_to_bits(5, 4) == (1, 0, 1, 0)
    assert f2.concat([(1, 2), (3, 2)]) == 0b1101
