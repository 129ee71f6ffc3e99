import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsslab.qotp import (OtpKey, enc_matrix, enc_operator, key_average_check, key_bits, key_space,
                         otp_dec, otp_enc, pauli_x, pauli_z)
from qsslab.qsim import SimError, basis_state, random_density, random_state, state_from


def test_x_flips_qubit():
    out = otp_enc(basis_state((2,), (0,)), OtpKey(((1, 0),), (2,)))
    assert np.allclose(out.amplitudes, [0, 1])


def test_z_maps_plus_to_minus():
    plus = state_from([1, 1], (2,), normalize=True)
    out = otp_enc(plus, OtpKey(((0, 1),), (2,)))
    assert np.allclose(out.amplitudes, np.array([1, -1]) / np.sqrt(2))


def test_qutrit_phase_applied_before_shift():
    # Z^2 leaves |0> alone, X then moves it to |1>
    out = otp_enc(basis_state((3,), (0,)), OtpKey(((1, 2),), (3,)))
    assert np.allclose(out.amplitudes, [0, 1, 0])
    w = np.exp(2j * np.pi / 3)
    out = otp_enc(basis_state((3,), (1,)), OtpKey(((1, 2),), (3,)))
    assert np.allclose(out.amplitudes, [0, 0, w**2])


@pytest.mark.parametrize("d", [2, 3, 5])
def test_operator_matches_state_action(d):
    rng = np.random.default_rng(d)
    s = random_state((d,), rng)
    for a, b in itertools.product(range(d), repeat=2):
        out = otp_enc(s, OtpKey(((a, b),), (d,)))
        assert np.allclose(out.amplitudes, enc_operator(d, a, b) @ s.amplitudes)


def test_pauli_commutation():
    d = 5
    X, Z = pauli_x(d), pauli_z(d)
    w = np.exp(2j * np.pi / d)
    assert np.allclose(Z @ X, w * X @ Z)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_dec_inverts_enc_for_every_key(d):
    rng = np.random.default_rng(10 + d)
    s = random_state((d, 2), rng)
    for a, b in itertools.product(range(d), repeat=2):
        k = OtpKey(((a, b),), (d,))
        back = otp_dec(otp_enc(s, k, [0]), k, [0])
        assert np.max(np.abs(back.amplitudes - s.amplitudes)) <= 1e-12


def test_key_average_examples():
    assert key_average_check(2, np.diag([1.0, 0])) <= 1e-10
    assert key_average_check(2, np.full((2, 2), 0.5)) <= 1e-10
    rng = np.random.default_rng(7)
    v = random_state((3,), rng).amplitudes
    assert key_average_check(3, np.outer(v, v.conj())) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 7))
def test_key_average_is_maximally_mixed(seed, d):
    rho = random_density(d, np.random.default_rng(seed))
    avg = sum(enc_matrix(rho, d, a, b) for a in range(d) for b in range(d)) / d**2
    assert np.allclose(avg, np.eye(d) / d, atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(dims=st.lists(st.integers(2, 6), min_size=1, max_size=3), data=st.data())
def test_key_integer_round_trip(dims, data):
    value = data.draw(st.integers(0, key_space(dims) - 1))
    k = OtpKey.from_int(value, dims)
    assert k.to_int() == value
    assert all(0 <= a < d and 0 <= b < d for (a, b), d in zip(k.pairs, k.dims))


def test_key_packing_order_and_size():
    k = OtpKey(((1, 2), (0, 1)), (3, 3))
    assert k.to_int() == ((1 * 3 + 2) * 3 + 0) * 3 + 1
    assert key_space((3, 3)) == 81
    assert key_bits((3,)) == 4
    assert key_bits((2, 2)) == 4
    with pytest.raises(SimError):
        OtpKey(((3, 0),), (3,))
    with pytest.raises(SimError):
        OtpKey.from_int(81, (3, 3))
