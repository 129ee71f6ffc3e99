import itertools

import pytest
from hypothesis import given, settings, strategies as st

from qsslab.gf import (BINARY_POLYNOMIALS, FieldError, Poly, dual_and_subcode, field_arith, gf, gf2,
                       in_span, next_prime, null_space, poly_interpolate, rank, rs_code,
                       rs_erasure_decode)


def brute_gf4_table():
    """Multiply GF(4) elements as polynomials over GF(2), reducing by x^2+x+1 by hand."""
    table = {}
    for a, b in itertools.product(range(4), repeat=2):
        prod = [0, 0, 0]
        for i in range(2):
            for j in range(2):
                prod[i + j] ^= ((a >> i) & 1) & ((b >> j) & 1)
        if prod[2]:  # x^2 = x + 1
            prod[0] ^= 1
            prod[1] ^= 1
        table[a, b] = prod[0] | (prod[1] << 1)
    return table


def test_small_prime_arithmetic():
    assert field_arith(gf(3), "mul", 2, 2) == 1
    assert field_arith(gf(5), "inv", 3) == 2
    assert field_arith(gf(7), "neg", 3) == 4
    assert field_arith(gf(7), "add", 5, 4) == 2


def test_gf4_matches_hand_table():
    F = gf2(2)
    assert F.poly == 0b111
    assert field_arith(F, "mul", 2, 2) == 3
    for (a, b), v in brute_gf4_table().items():
        assert F.mul(a, b) == v


@pytest.mark.parametrize("r", sorted(BINARY_POLYNOMIALS))
def test_every_default_polynomial_gives_a_field(r):
    F = gf2(r)
    # the multiplicative group is cyclic of order 2^r - 1, so a^(q-1) = 1
    for a in {1, F.q - 1, min(2, F.q - 1), min(3, F.q - 1)}:
        assert F.pow(a, F.q - 1) == 1
        assert F.mul(a, F.inv(a)) == 1


def test_reducible_polynomial_rejected():
    with pytest.raises(FieldError):
        gf2(2, 0b101)  # x^2 + 1 = (x + 1)^2


def test_non_prime_and_zero_inverse():
    with pytest.raises(FieldError):
        gf(9)
    with pytest.raises(ZeroDivisionError):
        gf(5).inv(0)
    with pytest.raises(FieldError):
        gf(5).check(5)


@pytest.mark.parametrize("m, p", [(1, 2), (2, 2), (4, 5), (14, 17), (256, 257), (65520, 65521)])
def test_next_prime(m, p):
    assert next_prime(m) == p


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7, 13, 257]), a=st.integers(0, 10**6), b=st.integers(0, 10**6),
       c=st.integers(0, 10**6))
def test_prime_field_axioms(p, a, b, c):
    F = gf(p)
    a, b, c = a % p, b % p, c % p
    assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
    assert F.add(a, F.neg(a)) == 0
    if b:
        assert F.mul(F.div(a, b), b) == a


@settings(max_examples=60, deadline=None)
@given(r=st.integers(1, 16), a=st.integers(0, 2**16 - 1), b=st.integers(1, 2**16 - 1))
def test_binary_field_division(r, a, b):
    F = gf2(r)
    a, b = a % F.q, max(1, b % F.q)
    assert F.mul(F.div(a, b), b) == a


def test_interpolation_examples():
    assert poly_interpolate(gf(3), [(0, 1), (1, 2)]).coeffs == (1, 1)
    assert poly_interpolate(gf(7), [(2, 3)]).coeffs == (3,)
    F = gf(5)
    pts = [(1, 4), (2, 0), (3, 1)]
    p = poly_interpolate(F, pts)
    assert p.degree <= 2
    assert all(p(x) == y for x, y in pts)


def test_interpolation_rejects_repeated_x():
    with pytest.raises(FieldError):
        poly_interpolate(gf(5), [(1, 1), (1, 2)])


@settings(max_examples=40, deadline=None)
@given(coeffs=st.lists(st.integers(0, 10), min_size=1, max_size=5))
def test_interpolation_recovers_random_polynomial(coeffs):
    F = gf(11)
    p = Poly(F, tuple(coeffs))
    q = poly_interpolate(F, [(x, p(x)) for x in range(len(coeffs))])
    assert q.coeffs == p.coeffs


def test_rs_codewords_by_enumeration():
    F = gf(3)
    code = rs_code(F, 3, 2)
    expected = {tuple((c0 + c1 * x) % 3 for x in range(3)) for c0 in range(3) for c1 in range(3)}
    assert set(code.codewords()) == expected
    assert len(expected) == 9


def test_rs_constant_code_and_distance():
    F = gf(5)
    c = rs_code(F, 4, 1, points=(1, 2, 3, 4))
    assert set(c.codewords()) == {(a,) * 4 for a in range(5)}
    assert c.min_distance == 4
    assert rs_code(F, 4, 2).min_distance == 3


@pytest.mark.parametrize("q, n, k", [(5, 4, 2), (7, 5, 3), (7, 6, 2)])
def test_rs_is_mds(q, n, k):
    assert rs_code(gf(q), n, k).min_distance == n - k + 1


def test_erasure_decoding():
    code = rs_code(gf(3), 3, 2)
    assert rs_erasure_decode(code, [(0, 1), (1, 2)]) == (1, 2, 0)
    assert rs_erasure_decode(code, [(0, 1), (1, 2), (2, 0)]) == (1, 2, 0)
    with pytest.raises(FieldError):
        rs_erasure_decode(code, [(0, 1), (1, 2), (2, 1)])
    with pytest.raises(FieldError):
        rs_erasure_decode(code, [(0, 1)])


def test_dual_of_rs32_is_repetition_inside_code():
    F = gf(3)
    c2 = rs_code(F, 3, 2)
    rep = dual_and_subcode(c2, c2)
    assert set(rep.dual.codewords()) == {(a, a, a) for a in range(3)}
    assert rep.contained


def test_dual_of_full_space_is_zero():
    F = gf(2)
    full = rs_code(F, 2, 2)
    rep = dual_and_subcode(full, full)
    assert rep.dual.k == 0
    assert rep.contained


@pytest.mark.parametrize("points", [None, (1, 2, 3, 4)])
def test_dual_of_rs43_against_codeword_enumeration(points):
    # dual of RS[4,3] over GF(5) is spanned by v_i = 1 / prod_{j != i}(x_i - x_j); with n = q - 1
    # these multipliers are a degree-1 polynomial in x_i, so the dual lies inside RS[4,2]
    F = gf(5)
    c2 = rs_code(F, 4, 3, points)
    xs = c2.points
    v = []
    for i, xi in enumerate(xs):
        prod = 1
        for j, xj in enumerate(xs):
            if j != i:
                prod = prod * (xi - xj) % 5
        v.append(pow(prod, -1, 5))
    for k, expect in ((2, True), (1, False)):
        c1 = rs_code(F, 4, k, points)
        rep = dual_and_subcode(c1, c2)
        assert rep.dual.k == 1
        assert rep.dual.contains(v)
        assert rep.contained is (tuple(v) in set(c1.codewords())) is expect


def test_null_space_is_orthogonal():
    F = gf(7)
    rows = [[1, 2, 3, 4], [0, 1, 5, 6]]
    ns = null_space(F, rows, 4)
    assert len(ns) == 4 - rank(F, rows)
    for v in ns:
        for r in rows:
            assert F.dot(v, r) == 0
    combo = [(3 * a + 2 * b) % 7 for a, b in zip(*rows)]
    assert in_span(F, rows, combo)
    assert not in_span(F, rows, [0, 0, 0, 1])
