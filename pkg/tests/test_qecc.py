import itertools
import math

import numpy as np
import pytest

from qsslab.access import WeightFunction, parse_expr, threshold
from qsslab.gf import gf, gf2, rs_code
from qsslab.qecc import (CodeError, NotCorrectableError, codespace_projector, copies_required, css_build,
                         kl_check, long_message_params, min_message_length, multicopy_threshold,
                         quantum_shamir, quantum_shamir_decoder, synthesize_erasure_decoder, tree_qecc,
                         weighted_expand)
from qsslab.qsim import (PureState, RegisterSystem, apply_basis_permutation, basis_state,
                         entangle_reference, partial_trace, random_state)


def ent_fidelity(qc, P):
    d = qc.logical_dim
    st = qc.encode(entangle_reference(d, "ref", "s0"), ["s0"])
    out = qc.decode(st, P, "out")
    rho = partial_trace(out, ["ref", "out"]).matrix
    phi = np.eye(d).reshape(-1) / math.sqrt(d)
    return float(np.real(phi.conj() @ rho @ phi))


def shamir_by_enumeration(t, n, q):
    """Encoder columns written out from the polynomial definition."""
    L = 2 * t - 1
    V = np.zeros((q**L, q))
    for s in range(q):
        for c in itertools.product(range(q), repeat=t - 1):
            coeffs = list(c) + [s]
            word = [sum(a * x**j for j, a in enumerate(coeffs)) % q for x in range(L)]
            V[np.ravel_multi_index(word, (q,) * L), s] += q ** (-(t - 1) / 2)
    return V


def test_shamir_2_3_basis_states():
    qc = quantum_shamir(2, 3, 3)
    V = qc.full_encoder()
    zero = np.zeros(27)
    for w in ((0, 0, 0), (1, 1, 1), (2, 2, 2)):
        zero[np.ravel_multi_index(w, (3, 3, 3))] = 1 / math.sqrt(3)
    one = np.zeros(27)
    for w in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        one[np.ravel_multi_index(w, (3, 3, 3))] = 1 / math.sqrt(3)
    assert np.allclose(V[:, 0], zero)
    assert np.allclose(V[:, 1], one)


@pytest.mark.parametrize("t, n, q", [(2, 3, 3), (3, 5, 5), (2, 2, 3), (3, 4, 5)])
def test_shamir_encoder_matches_enumeration(t, n, q):
    assert np.allclose(quantum_shamir(t, n, q).full_encoder(), shamir_by_enumeration(t, n, q))


def test_single_share_is_maximally_mixed():
    qc = quantum_shamir(2, 3, 3)
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = random_state((3,), rng).relabel(["s0"])
        st = qc.encode(s, ["s0"])
        for r in range(3):
            assert np.allclose(partial_trace(st, [f"q{r}"]).matrix, np.eye(3) / 3)


@pytest.mark.parametrize("t, n, q", [(2, 3, 3), (3, 5, 5), (3, 4, 5)])
def test_shamir_entanglement_fidelity(t, n, q):
    qc = quantum_shamir(t, n, q)
    for P in itertools.combinations(range(1, n + 1), t):
        assert ent_fidelity(qc, P) == pytest.approx(1, abs=1e-9)


def test_shamir_rejects_bad_parameters():
    with pytest.raises(CodeError):
        quantum_shamir(2, 4, 5)
    with pytest.raises(CodeError):
        quantum_shamir(3, 5, 4)


def test_analytic_decoder_map():
    qc = quantum_shamir(2, 3, 3)
    table, regs, out = quantum_shamir_decoder(qc, [1, 2])
    assert regs == [0, 1] and out == 0
    assert table[np.ravel_multi_index((0, 1), (3, 3))] == np.ravel_multi_index((1, 2), (3, 3))
    for y1, y2 in itertools.product(range(3), repeat=2):
        s, e = (y2 - y1) % 3, (2 * y2 - y1) % 3
        assert table[y1 * 3 + y2] == s * 3 + e


@pytest.mark.parametrize("P", [(1, 2), (1, 3), (2, 3)])
def test_analytic_decoder_recovers_secret(P):
    qc = quantum_shamir(2, 3, 3)
    rng = np.random.default_rng(1)
    s = random_state((3,), rng).relabel(["s0"])
    st = qc.encode(s, ["s0"])
    table, regs, out = quantum_shamir_decoder(qc, P)
    dec = apply_basis_permutation(st, table, [f"q{r}" for r in regs])
    rho = partial_trace(dec, [f"q{out}"]).matrix
    v = s.amplitudes
    assert np.real(v.conj() @ rho @ v) == pytest.approx(1, abs=1e-12)


def test_synthesized_decoder_diagnostics():
    qc = quantum_shamir(2, 3, 3)
    V, dims = qc.full_encoder(), qc.register_dims
    dec = synthesize_erasure_decoder(V, dims, [0, 1])
    assert dec.diagnostic <= 1e-12
    full = synthesize_erasure_decoder(V, dims, [0, 1, 2])
    assert full.diagnostic <= 1e-12 and full.schmidt_rank == 1
    with pytest.raises(NotCorrectableError) as err:
        synthesize_erasure_decoder(V, dims, [0])
    assert err.value.diagnostic > 0.1


def test_css_matches_shamir():
    F = gf(3)
    qc = css_build(rs_code(F, 3, 2), rs_code(F, 3, 2))
    assert qc.logical_dim == 3
    assert np.allclose(codespace_projector(qc), codespace_projector(quantum_shamir(2, 3, 3)), atol=1e-10)
    V = qc.full_encoder()
    for e in range(3):
        assert kl_check(V, qc.register_dims, [e]) <= 1e-12
    for e in itertools.combinations(range(3), 2):
        assert kl_check(V, qc.register_dims, list(e)) > 0.1
    assert qc.realized().equivalent(threshold(2, 3))


def test_css_trivial_code():
    F = gf(2)
    full = rs_code(F, 1, 1)
    qc = css_build(full, full)
    assert qc.logical_dim == 2
    assert np.allclose(qc.full_encoder(), np.eye(2))


def test_css_binary_field():
    F = gf2(2)
    qc = css_build(rs_code(F, 3, 2), rs_code(F, 3, 2))
    assert qc.logical_dim == 4
    for P in ([1, 2], [2, 3]):
        assert ent_fidelity(qc, P) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("t, n, copies", [(1, 3, 3), (2, 4, 2), (3, 5, 1), (1, 1, 1), (2, 6, 4)])
def test_copies_required(t, n, copies):
    assert copies_required(t, n) == copies


def test_copies_formula_everywhere():
    for n in range(1, 11):
        for t in range(1, n + 1):
            assert copies_required(t, n) == max(1, n - 2 * t + 2)
        assert copies_required(1, n) == n


def test_multicopy_2_of_4():
    qc = multicopy_threshold(2, 4, 5)
    assert qc.copies == 2
    assert all(len(qc.party_registers(i)) == 1 for i in range(1, 5))
    assert qc.realized().dominates(threshold(2, 4))
    assert sorted(qc.realized().minimal_sets()) == [(1, 2), (1, 3), (2, 3), (4,)]
    rng = np.random.default_rng(3)
    psi = random_state((5,), rng)
    v = psi.amplitudes
    two = psi.relabel(["c0"]) @ psi.relabel(["c1"])
    st = qc.encode(two, ["c0", "c1"])
    for P in itertools.combinations(range(1, 5), 2):
        rho = partial_trace(qc.decode(st, P, "out"), ["out"]).matrix
        assert np.real(v.conj() @ rho @ v) == pytest.approx(1, abs=1e-9)
    # the second branch hands party 4 the copy directly
    b = qc.branches[1]
    assert [qc.owners[r] for r in b.registers] == [4]
    assert np.allclose(b.encoder, np.eye(5))


def test_multicopy_majority_is_plain_shamir():
    qc = multicopy_threshold(3, 5, 5)
    assert qc.copies == 1
    assert np.allclose(qc.full_encoder(), quantum_shamir(3, 5, 5).full_encoder())


def test_multicopy_needs_enough_points():
    with pytest.raises(CodeError):
        multicopy_threshold(3, 6, 3)


def test_weighted_expansion():
    w = WeightFunction((2, 1, 1))
    qc = weighted_expand(quantum_shamir(3, 4, 5), w)
    assert len(qc.party_registers(1)) == 2
    assert qc.realized().equivalent(parse_expr("wth(3; 2*x1, x2, x3)"))
    for P in ([1, 2], [1, 3], [1, 2, 3]):
        assert ent_fidelity(qc, P) == pytest.approx(1, abs=1e-9)
    with pytest.raises(NotCorrectableError):
        qc.decoder([2, 3])


def test_weighted_expansion_unit_weights_is_identity():
    inner = quantum_shamir(2, 3, 3)
    qc = weighted_expand(inner, WeightFunction((1, 1, 1)))
    assert np.allclose(qc.full_encoder(), inner.full_encoder())


def test_tree_code_two_levels():
    tree = parse_expr("th(2, x1, x2, th(2, x3, x4, x5))")
    qc = tree_qecc(tree, 3)
    held = [r for r, o in enumerate(qc.owners) if o is not None]
    assert len(held) == 5
    assert np.prod(qc.register_dims) == 3**5
    for P in ([1, 2], [1, 4, 5], [2, 3, 5]):
        assert ent_fidelity(qc, P) == pytest.approx(1, abs=1e-9)
    assert qc.realized().equivalent(tree)


def test_tree_code_depth_one_is_inner_code():
    qc = tree_qecc(parse_expr("th(2, x1, x2, x3)"), 3)
    assert np.allclose(codespace_projector(qc), codespace_projector(quantum_shamir(2, 3, 3)))


def test_long_message_example_row():
    p = long_message_params(3, 2, 12)
    # the stated 29.4 is a truncation of the root 29.49...
    assert 29.4 <= p.n_star < 29.5
    assert p.n_star * math.log2(p.n_star) == pytest.approx(144, abs=1e-6)
    assert (p.c, p.N, p.r, p.K) == (10, 30, 5, 17)
    assert 2 * p.K - p.N == 4 >= math.ceil(12 / 5)
    assert p.N - p.K == 13 >= p.c * (3 - 2)
    assert p.ok
    assert p.ratio == pytest.approx(150 / 36)
    assert p.ratio_bound == 32


@pytest.mark.parametrize("n, t", [(3, 2), (5, 3), (7, 4)])
def test_long_message_sweep(n, t):
    m0 = min_message_length(n, t)
    if m0 > 1:
        assert not long_message_params(n, t, m0 - 1).ok
    for m in range(m0, m0 + 50):
        p = long_message_params(n, t, m)
        assert p.ok and p.ratio <= p.ratio_bound
