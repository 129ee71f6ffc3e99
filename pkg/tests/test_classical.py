import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsslab.access import MinSets, from_mask, parse_expr, threshold
from qsslab.classical import (ClassicalScheme, FormulaScheme, LeakyScheme, SchemeError, ShamirScheme,
                              Tape, UnauthorizedError, YaoScheme, decode_bytes, formula_share,
                              leaky_share, prg, prg_bits, privacy_distance, row_codes,
                              shamir_rec, shamir_share, view_counts)
from qsslab.gf import gf, gf2


def brute_distance(scheme, P, secrets):
    """Statistical distance of P's views, enumerating every full tape with the generic view."""
    dists = []
    for s in secrets:
        c = Counter(scheme.view(P, s, t) for t in itertools.product(*map(range, scheme.tape_moduli)))
        total = sum(c.values())
        dists.append({v: k / total for v, k in c.items()})
    best = 0.0
    for a, b in itertools.combinations(dists, 2):
        keys = set(a) | set(b)
        best = max(best, 0.5 * sum(abs(a.get(k, 0) - b.get(k, 0)) for k in keys))
    return best


def unauthorized(f):
    return [from_mask(m) for m in range(1, 1 << f.n) if not f.evaluate(from_mask(m))]


def authorized(f):
    return [from_mask(m) for m in range(1, 1 << f.n) if f.evaluate(from_mask(m))]


# ---- PRG and tapes -------------------------------------------------------


def test_prg_deterministic_and_empty():
    assert prg(b"seed", 32) == prg(b"seed", 32)
    assert prg(b"seed", 0) == b""
    assert prg(b"seed", 16, tag=b"a") != prg(b"seed", 16, tag=b"b")
    assert prg(b"seed", 8, backend="toy-lcg") == prg(b"seed", 8, backend="toy-lcg")


def test_prg_no_prefix_collisions():
    rng = np.random.default_rng(0)
    seeds = {bytes(rng.integers(0, 256, 16, dtype=np.uint8)) for _ in range(10_000)}
    assert len({prg(s, 16) for s in seeds}) == len(seeds)


def test_prg_bits_range():
    for k in range(50):
        assert 0 <= prg_bits(k, 8, 5, "shake128", "t") < 32


def test_tape_seed_and_json():
    t = Tape(seed=42)
    assert t.draw((5, 7, 9)) == t.draw((5, 7, 9))
    assert Tape.from_json(t.to_json()) == t
    e = Tape(values=(1, 2))
    assert Tape.from_json(e.to_json()).draw((3, 3)) == (1, 2)
    with pytest.raises(SchemeError):
        e.draw((2, 2))
    with pytest.raises(SchemeError):
        Tape(seed=1 << 64)


def test_row_codes_matches_unique():
    rng = np.random.default_rng(1)
    rows = rng.integers(0, 4, size=(500, 6))
    codes, k = row_codes(rows)
    _, ref = np.unique(rows, axis=0, return_inverse=True)
    assert k == len(set(map(tuple, rows)))
    for a, b in itertools.combinations(range(60), 2):
        assert (codes[a] == codes[b]) == (ref.reshape(-1)[a] == ref.reshape(-1)[b])


def test_bytes_round_trip():
    sv = formula_share(5, threshold(2, 3), 300, [17])
    for i in sv.shares:
        assert decode_bytes(sv.party_bytes(i), sv.moduli[i]) == sv.shares[i]


# ---- Shamir --------------------------------------------------------------


def test_shamir_example():
    F = gf(5)
    assert shamir_share(3, 2, 3, F, [1]).shares == {1: (4,), 2: (0,), 3: (1,)}
    assert shamir_rec({1: 4, 2: 0}, 2, 3, F) == 3


def test_shamir_t1_replicates():
    sv = shamir_share(4, 1, 3, gf(7), [])
    assert set(sv.shares.values()) == {(4,)}


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_shamir_round_trip(data):
    q = data.draw(st.sampled_from([5, 7, 11]))
    n = data.draw(st.integers(2, q - 1))
    t = data.draw(st.integers(1, n))
    s = ShamirScheme(t, n, gf(q))
    secret = data.draw(st.integers(0, q - 1))
    values = tuple(data.draw(st.integers(0, m - 1)) for m in s.tape_moduli)
    sv = s.share_with(secret, values)
    P = data.draw(st.sets(st.integers(1, n), min_size=t, max_size=t))
    assert s.reconstruct({i: sv.shares[i] for i in P}) == secret


def test_shamir_binary_field():
    s = ShamirScheme(2, 3, gf2(4))
    sv = s.share(9, Tape(seed=3))
    assert s.reconstruct({1: sv.shares[1], 3: sv.shares[3]}) == 9


def test_shamir_wide_secret():
    s = ShamirScheme.for_modulus(2, 3, 625)
    sv = s.share(600, Tape(seed=8))
    assert s.reconstruct({2: sv.shares[2], 3: sv.shares[3]}) == 600


@pytest.mark.parametrize("P", [(1,), (2,), (3,)])
def test_shamir_single_share_private(P):
    s = ShamirScheme(2, 3, gf(5))
    vc = view_counts(s, P, range(5))
    assert privacy_distance(vc) == 0
    assert brute_distance(s, P, range(5)) == 0


# ---- formula scheme -------------------------------------------------------


def test_formula_examples():
    assert formula_share(1, parse_expr("and(x1,x2)"), 2, [0]).shares == {1: (0,), 2: (1,)}
    assert formula_share(1, parse_expr("or(x1,x2)"), 2, []).shares == {1: (1,), 2: (1,)}


def test_formula_two_triples_exhaustive():
    f = MinSets.of(4, [[1, 2, 3], [2, 3, 4]])
    s = FormulaScheme(f, 3)
    for tape in itertools.product(*map(range, s.tape_moduli)):
        for secret in range(3):
            sv = s.share_with(secret, tape)
            for P in ([1, 2, 3], [2, 3, 4]):
                assert s.reconstruct({i: sv.shares[i] for i in P}) == secret
    bad = unauthorized(f)
    assert len(bad) == 12
    for P in bad:
        assert privacy_distance(view_counts(s, P, range(3))) == 0
        with pytest.raises(UnauthorizedError):
            s.reconstruct({i: s.share_with(0, [0] * len(s.tape_moduli)).shares[i] for i in P})


@pytest.mark.parametrize("expr", ["and(x1, th(2, x2, x3, x4))", "wth(3; 2*x1, x2, x3)",
                                  "or(and(x1,x2), and(x2,x3))"])
def test_formula_vectorized_views_match_generic(expr):
    f = parse_expr(expr)
    s = FormulaScheme(f, 5)
    rng = np.random.default_rng(2)
    tapes = np.stack([rng.integers(0, m, 40) for m in s.tape_moduli], axis=1)
    for P in unauthorized(f)[:4] + authorized(f)[:2]:
        assert np.array_equal(s.view_batch(P, 3, tapes), ClassicalScheme.view_batch(s, P, 3, tapes))


@pytest.mark.parametrize("expr", ["and(x1, th(2, x2, x3))", "wth(3; 2*x1, x2, x3)"])
def test_formula_privacy_matches_brute_force(expr):
    f = parse_expr(expr)
    s = FormulaScheme(f, 2)
    for P in unauthorized(f):
        assert privacy_distance(view_counts(s, P, range(2))) == brute_distance(s, P, range(2)) == 0


# ---- leaky scheme --------------------------------------------------------


def test_leaky_zero_equals_formula():
    f = MinSets.of(3, [[1, 2]])
    for tape in itertools.product(range(2), repeat=1):
        a = leaky_share(1, f, 2, 0, tape)
        b = formula_share(1, f, 2, tape)
        assert a.shares == b.shares


@pytest.mark.parametrize("eps", [Fraction(1, 4), Fraction(1, 2), Fraction(1)])
def test_leaky_distance_is_eps(eps):
    f = MinSets.of(3, [[1, 2]])
    s = LeakyScheme(f, 2, eps)
    P = (1, 3)
    d = privacy_distance(view_counts(s, P, range(2)))
    assert d == pytest.approx(float(eps))
    assert brute_distance(s, P, range(2)) == pytest.approx(float(eps))
    sv = s.share(1, Tape(seed=5))
    assert s.reconstruct({1: sv.shares[1], 2: sv.shares[2]}) == 1


# ---- wire-key scheme ------------------------------------------------------


def test_yao_or_either_party():
    s = YaoScheme(parse_expr("or(x1,x2)"), 16, 2)
    for seed in range(20):
        sv = s.share(seed % 2, Tape(seed=seed))
        for i in (1, 2):
            assert s.reconstruct({i: sv.shares[i]}, sv.public) == seed % 2


def test_yao_depth_two_exact_access():
    f = parse_expr("and(x1, th(2, x2, x3, x4))")
    s = YaoScheme(f, 16, 4)
    for seed in range(4):
        sv = s.share(seed, Tape(seed=seed))
        for m in range(16):
            P = from_mask(m)
            if f.evaluate(P):
                assert s.reconstruct({i: sv.shares[i] for i in P}, sv.public) == seed
            else:
                with pytest.raises(UnauthorizedError):
                    s.reconstruct({i: sv.shares[i] for i in P}, sv.public)


def test_yao_weighted_gate():
    f = parse_expr("wth(3; 2*x1, x2, x3)")
    s = YaoScheme(f, 8, 3)
    sv = s.share(2, Tape(seed=1))
    assert s.reconstruct({1: sv.shares[1], 3: sv.shares[3]}, sv.public) == 2
    with pytest.raises(UnauthorizedError):
        s.reconstruct({2: sv.shares[2], 3: sv.shares[3]}, sv.public)


def test_yao_batch_matches_generic():
    f = parse_expr("and(x1, th(2, x2, x3, x4))")
    s = YaoScheme(f, 4, 5)
    rng = np.random.default_rng(3)
    tapes = np.stack([rng.integers(0, m, 30) for m in s.tape_moduli], axis=1)
    for P in ([1], [2, 3], [1, 2, 4]):
        assert np.array_equal(s.view_batch(P, 4, tapes), ClassicalScheme.view_batch(s, P, 4, tapes))
        h = s.hybrid(P)
        assert np.array_equal(h.view_batch(P, 4, tapes), ClassicalScheme.view_batch(h, P, 4, tapes))


def test_yao_uniform_key_hybrid_is_exactly_private():
    f = parse_expr("and(x1, th(2, x2, x3, x4))")
    s = YaoScheme(f, 2, 2)
    for P in unauthorized(f):
        h = s.hybrid(P)
        assert privacy_distance(view_counts(h, P, range(2))) == 0


def test_yao_real_prg_views_differ_at_tiny_lambda():
    # without the hybrid substitution a 2-bit key leaks: the real views are not identical
    f = parse_expr("and(x1, th(2, x2, x3, x4))")
    s = YaoScheme(f, 2, 2)
    assert privacy_distance(view_counts(s, (2, 3, 4), range(2))) > 0


def test_exact_cap_enforced():
    s = YaoScheme(parse_expr("and(x1, th(2, x2, x3, x4))"), 16, 2)
    with pytest.raises(SchemeError):
        view_counts(s, (2, 3), range(2), cap=1000)
