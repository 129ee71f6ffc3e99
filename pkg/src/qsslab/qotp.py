"""Quantum one-time pad with generalized Pauli operators.

For a register of dimension d the key is a pair (a, b) in Z_d x Z_d and
encryption applies X^a Z^b (Z first), where X|j> = |j+1> and
Z|j> = w^j |j> with w = exp(2 pi i / d).  Decryption is the exact adjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qsim import PureState, SimError


@dataclass(frozen=True)
class OtpKey:
    pairs: tuple[tuple[int, int], ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.pairs) != len(self.dims):
            raise SimError("one key pair per register")
        for (a, b), d in zip(self.pairs, self.dims):
            if not (0 <= a < d and 0 <= b < d):
                raise SimError(f"key component out of range for dimension {d}")

    @property
    def bits(self) -> int:
        return key_bits(self.dims)

    def to_int(self) -> int:
        """Mixed-radix packing with digits (a0, b0, a1, b1, ...), a0 most significant."""
        v = 0
        for (a, b), d in zip(self.pairs, self.dims):
            v = (v * d + a) * d + b
        return v

    @classmethod
    def from_int(cls, value: int, dims: Sequence[int]) -> "OtpKey":
        dims = tuple(dims)
        if not 0 <= value < key_space(dims):
            raise SimError("key integer out of range")
        pairs = []
        for d in reversed(dims):
            value, b = divmod(value, d)
            value, a = divmod(value, d)
            pairs.append((a, b))
        return cls(tuple(reversed(pairs)), dims)


def key_space(dims: Sequence[int]) -> int:
    return math.prod(d * d for d in dims)


def key_bits(dims: Sequence[int]) -> int:
    return sum(math.ceil(math.log2(d * d)) for d in dims)


def pauli_x(d: int) -> np.ndarray:
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def pauli_z(d: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def enc_operator(d: int, a: int, b: int) -> np.ndarray:
    return np.linalg.matrix_power(pauli_x(d), a) @ np.linalg.matrix_power(pauli_z(d), b)


def _apply(state: PureState, key: OtpKey, targets, inverse: bool) -> PureState:
    targets = list(range(len(state.dims))) if targets is None else targets
    pos = state.system.positions(targets)
    if tuple(state.dims[p] for p in pos) != key.dims:
        raise SimError("key shape does not match the target registers")
    t = state.tensor().copy()
    for p, (a, b), d in zip(pos, key.pairs, key.dims):
        phase_shape = [1] * t.ndim
        phase_shape[p] = d
        phase = np.exp(2j * np.pi * b * np.arange(d) / d).reshape(phase_shape)
        if not inverse:
            t = np.roll(t * phase, a, axis=p)
        else:
            t = np.roll(t, -a, axis=p) * phase.conj()
    return PureState(state.system, t.reshape(-1))


def otp_enc(state: PureState, key: OtpKey, targets=None) -> PureState:
    return _apply(state, key, targets, inverse=False)


def otp_dec(state: PureState, key: OtpKey, targets=None) -> PureState:
    return _apply(state, key, targets, inverse=True)


def enc_matrix(rho: np.ndarray, d: int, a: int, b: int) -> np.ndarray:
    u = enc_operator(d, a, b)
    return u @ rho @ u.conj().T


def key_average_check(d: int, rho: np.ndarray) -> float:
    """Max-norm deviation of the key-averaged encryption of ``rho`` from I/d."""
    if d > 16:
        raise SimError("dimension above 16")
    avg = sum(enc_matrix(rho, d, a, b) for a in range(d) for b in range(d)) / d**2
    return float(np.max(np.abs(avg - np.eye(d) / d)))
