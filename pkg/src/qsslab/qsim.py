"""Dense pure-state and density-matrix simulation of labeled qudit registers.

Amplitude index order is C-order mixed radix: register 0 is the most
significant digit.  States are immutable values; every operation returns a
new state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

AMPLITUDE_CAP = 1 << 20
KEEP_CAP = 4096
TOL_STATE = 1e-10
TOL_UNITARY = 1e-12


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterSystem:
    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.dims):
            raise SimError("one dimension per label")
        if len(set(self.labels)) != len(self.labels):
            raise SimError("register labels must be unique")
        if any(d < 2 for d in self.dims):
            raise SimError("register dimensions must be >= 2")
        if self.size > AMPLITUDE_CAP:
            raise SimError(f"{self.size} amplitudes exceed the cap {AMPLITUDE_CAP}")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SimError(f"no register {label!r}") from None

    def positions(self, targets: Sequence[str | int]) -> list[int]:
        out = [t if isinstance(t, int) else self.index(t) for t in targets]
        if len(set(out)) != len(out):
            raise SimError("repeated target register")
        return out

    def __add__(self, other: "RegisterSystem") -> "RegisterSystem":
        return RegisterSystem(self.labels + other.labels, self.dims + other.dims)


def system(dims: Sequence[int], prefix: str = "r") -> RegisterSystem:
    return RegisterSystem(tuple(f"{prefix}{i}" for i in range(len(dims))), tuple(dims))


@dataclass(frozen=True, eq=False)
class PureState:
    system: RegisterSystem
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.size != self.system.size:
            raise SimError(f"{a.size} amplitudes for a system of size {self.system.size}")
        if abs(np.linalg.norm(a) - 1) > TOL_STATE:
            raise SimError(f"state norm {np.linalg.norm(a)} is not 1")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.system.dims

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.system, np.outer(a, a.conj()))

    def __matmul__(self, other: "PureState") -> "PureState":
        """Tensor product, self's registers first."""
        return PureState(self.system + other.system, np.kron(self.amplitudes, other.amplitudes))

    def relabel(self, labels: Sequence[str]) -> "PureState":
        return PureState(RegisterSystem(tuple(labels), self.dims), self.amplitudes)

    def permute(self, order: Sequence[str | int]) -> "PureState":
        """Reorder registers so that ``order`` lists the new sequence."""
        pos = self.system.positions(order)
        if sorted(pos) != list(range(len(self.dims))):
            raise SimError("order must mention every register once")
        t = np.transpose(self.tensor(), pos)
        sysm = RegisterSystem(tuple(self.system.labels[p] for p in pos),
                              tuple(self.dims[p] for p in pos))
        return PureState(sysm, t.reshape(-1))


def basis_state(dims: Sequence[int], digits: Sequence[int], labels: Sequence[str] | None = None) -> PureState:
    sysm = RegisterSystem(tuple(labels), tuple(dims)) if labels else system(dims)
    a = np.zeros(sysm.size, complex)
    a[int(np.ravel_multi_index(tuple(digits), tuple(dims))) if dims else 0] = 1
    return PureState(sysm, a)


def state_from(amplitudes, dims: Sequence[int] | None = None, labels: Sequence[str] | None = None,
               normalize: bool = False) -> PureState:
    a = np.asarray(amplitudes, complex).reshape(-1)
    if normalize:
        a = a / np.linalg.norm(a)
    dims = (a.size,) if dims is None else tuple(dims)
    sysm = RegisterSystem(tuple(labels), dims) if labels else system(dims)
    return PureState(sysm, a)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    system: RegisterSystem
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.system.size
        if m.shape != (d, d):
            raise SimError(f"matrix shape {m.shape} does not match dimension {d}")
        object.__setattr__(self, "matrix", m)

    def validate(self, tol: float = TOL_STATE) -> None:
        m = self.matrix
        if abs(np.trace(m) - 1) > tol:
            raise SimError(f"trace {np.trace(m)} is not 1")
        if np.max(np.abs(m - m.conj().T), initial=0) > 1e-12:
            raise SimError("matrix is not Hermitian")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -1e-9:
            raise SimError("matrix is not positive semidefinite")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.system.dims

    def __matmul__(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(self.system + other.system, np.kron(self.matrix, other.matrix))


def as_matrix(x) -> np.ndarray:
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, PureState):
        return x.density().matrix
    return np.asarray(x, complex)


@dataclass(frozen=True, eq=False)
class LinearIsometry:
    in_dims: tuple[int, ...]
    out_dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, complex)
        din, dout = int(np.prod(self.in_dims)), int(np.prod(self.out_dims))
        if m.shape != (dout, din):
            raise SimError(f"isometry shape {m.shape} does not match {dout}x{din}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(din)), initial=0)
        if err > TOL_UNITARY * max(1, din):
            raise SimError(f"not an isometry (V^dag V deviates by {err:.2e})")
        object.__setattr__(self, "in_dims", tuple(self.in_dims))
        object.__setattr__(self, "out_dims", tuple(self.out_dims))
        object.__setattr__(self, "matrix", m)

    def compose(self, inner: "LinearIsometry") -> "LinearIsometry":
        """self after inner."""
        if inner.out_dims != self.in_dims and int(np.prod(inner.out_dims)) != int(np.prod(self.in_dims)):
            raise SimError("dimension mismatch in composition")
        return LinearIsometry(inner.in_dims, self.out_dims, self.matrix @ inner.matrix)


def apply_isometry(state: PureState, v: LinearIsometry, targets: Sequence[str | int],
                   out_labels: Sequence[str] | None = None) -> PureState:
    """Apply ``v`` to ``targets``; outputs take the place of the first target.

    ``out_labels`` defaults to the target labels when input and output
    register counts agree.
    """
    pos = state.system.positions(targets)
    tdims = tuple(state.dims[p] for p in pos)
    if tdims != v.in_dims:
        raise SimError(f"target dims {tdims} do not match isometry input {v.in_dims}")
    if out_labels is None:
        if len(v.out_dims) != len(pos):
            raise SimError("out_labels required when the register count changes")
        out_labels = [state.system.labels[p] for p in pos]
    rest = [i for i in range(len(state.dims)) if i not in pos]
    t = np.transpose(state.tensor(), pos + rest).reshape(int(np.prod(tdims)), -1)
    new = v.matrix @ t
    first = min(pos)
    insert_at = sum(1 for r in rest if r < first)
    rest_labels = [state.system.labels[r] for r in rest]
    rest_dims = [state.dims[r] for r in rest]
    labels = rest_labels[:insert_at] + list(out_labels) + rest_labels[insert_at:]
    dims = rest_dims[:insert_at] + list(v.out_dims) + rest_dims[insert_at:]
    new_sys = RegisterSystem(tuple(labels), tuple(dims))
    k = len(v.out_dims)
    t = new.reshape(tuple(v.out_dims) + tuple(rest_dims))
    order = list(range(k, k + insert_at)) + list(range(k)) + list(range(k + insert_at, k + len(rest)))
    return PureState(new_sys, np.transpose(t, order).reshape(-1))


def permutation_table(dims: Sequence[int], fn: Callable[[tuple[int, ...]], Sequence[int]]) -> np.ndarray:
    """Integer image table of ``fn`` on the product basis, checked bijective."""
    dims = tuple(dims)
    total = int(np.prod(dims))
    table = np.empty(total, dtype=np.int64)
    for idx in range(total):
        digits = tuple(int(x) for x in np.unravel_index(idx, dims))
        table[idx] = np.ravel_multi_index(tuple(fn(digits)), dims)
    inverse = np.full(total, -1, dtype=np.int64)
    inverse[table] = np.arange(total)
    if np.any(inverse < 0):
        raise SimError("map is not a bijection on the product basis")
    return table


def apply_basis_permutation(state: PureState, mapping, targets: Sequence[str | int]) -> PureState:
    """Move the amplitude at basis tuple ``b`` of the targets to ``mapping(b)``.

    ``mapping`` is a callable on digit tuples or a precomputed index table.
    """
    pos = state.system.positions(targets)
    tdims = tuple(state.dims[p] for p in pos)
    table = mapping if isinstance(mapping, np.ndarray) else permutation_table(tdims, mapping)
    if table.shape != (int(np.prod(tdims)),):
        raise SimError("permutation table has the wrong size")
    if not np.array_equal(np.sort(table), np.arange(table.size)):
        raise SimError("map is not a bijection on the product basis")
    rest = [i for i in range(len(state.dims)) if i not in pos]
    t = np.transpose(state.tensor(), pos + rest).reshape(table.size, -1)
    out = np.empty_like(t)
    out[table] = t
    out = out.reshape(tdims + tuple(state.dims[r] for r in rest))
    inv = np.argsort(pos + rest)
    return PureState(state.system, np.transpose(out, inv).reshape(-1))


def partial_trace(state: PureState | DensityMatrix, keep: Sequence[str | int]) -> DensityMatrix:
    """Reduced state on ``keep`` (in the order given)."""
    sysm = state.system
    pos = sysm.positions(keep)
    kdims = tuple(sysm.dims[p] for p in pos)
    dk = int(np.prod(kdims)) if kdims else 1
    if dk > KEEP_CAP:
        raise SimError(f"kept dimension {dk} exceeds {KEEP_CAP}")
    rest = [i for i in range(len(sysm.dims)) if i not in pos]
    ksys = RegisterSystem(tuple(sysm.labels[p] for p in pos), kdims)
    if isinstance(state, PureState):
        m = np.transpose(state.tensor(), pos + rest).reshape(dk, -1)
        return DensityMatrix(ksys, m @ m.conj().T)
    nreg = len(sysm.dims)
    t = state.matrix.reshape(sysm.dims * 2)
    t = np.transpose(t, pos + rest + [nreg + p for p in pos] + [nreg + r for r in rest])
    dr = sysm.size // dk
    t = t.reshape(dk, dr, dk, dr)
    return DensityMatrix(ksys, np.einsum("ajbj->ab", t))


def trace_distance(a, b) -> float:
    """Half the trace norm of the difference."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise SimError("dimension mismatch")
    diff = ma - mb
    return float(0.5 * np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())


# Optimal distinguishing advantage between two states.
helstrom_advantage = trace_distance


def fidelity(a, b) -> float:
    """Uhlmann fidelity (squared convention: |<a|b>|^2 for pure states)."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    if isinstance(a, PureState):
        a, b = b, a
    if isinstance(b, PureState):
        v = b.amplitudes
        return float(np.real(v.conj() @ as_matrix(a) @ v))
    ma, mb = as_matrix(a), as_matrix(b)
    w, u = np.linalg.eigh(ma)
    sq = (u * np.sqrt(np.clip(w, 0, None))) @ u.conj().T
    ev = np.linalg.eigvalsh(sq @ mb @ sq)
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


def entangle_reference(d: int, ref: str = "ref", payload: str = "payload") -> PureState:
    """Maximally entangled pair sum_i |i>|i> / sqrt(d)."""
    if not 2 <= d <= 64:
        raise SimError("reference dimension must be in 2..64")
    a = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return PureState(RegisterSystem((ref, payload), (d, d)), a)


@dataclass(frozen=True)
class Schmidt:
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ik,jk->ij", np.sqrt(self.coefficients), self.left, self.right)


def schmidt(state: PureState, left: Sequence[str | int], tol: float = 1e-14) -> Schmidt:
    """Schmidt decomposition across ``left`` versus the remaining registers.

    Coefficients are the squared singular values (they sum to 1); columns of
    ``left``/``right`` are the Schmidt vectors.  The returned ``reconstruct``
    matrix is indexed (left basis, right basis).
    """
    pos = state.system.positions(left)
    rest = [i for i in range(len(state.dims)) if i not in pos]
    if not pos or not rest:
        raise SimError("both sides of the cut must be nonempty")
    dl = int(np.prod([state.dims[p] for p in pos]))
    m = np.transpose(state.tensor(), pos + rest).reshape(dl, -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > tol
    return Schmidt(s[keep] ** 2, u[:, keep], vh[keep].T)


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    d = int(np.prod(dims))
    a = rng.normal(size=d) + 1j * rng.normal(size=d)
    return state_from(a / np.linalg.norm(a), dims)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return m / np.trace(m)


def random_isometry(din: int, dout: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dout, din)) + 1j * rng.normal(size=(dout, din))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_channel(rho: np.ndarray, v: np.ndarray, d_out: int) -> np.ndarray:
    """Stinespring channel: apply isometry into (out, env) and trace env."""
    big = v @ rho @ v.conj().T
    d_env = v.shape[0] // d_out
    return np.einsum("ajbj->ab", big.reshape(d_out, d_env, d_out, d_env))
