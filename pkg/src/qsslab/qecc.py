"""Quantum erasure-correcting codes and their decoders.

A :class:`QECCScheme` is a list of branches; each branch encodes one copy of
the logical qudit into some registers.  Registers are owned by a party or by
the environment (pre-erased padding).  Decoding for a party set picks a
branch the set satisfies and synthesises an erasure decoder for the
registers the set holds in that branch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import null_space as complex_null_space

from .access import (AccessStructure, Gate, MinSets, MonotoneCircuit, TruthTable, WeightFunction,
                     threshold, to_mask, var_index)
from .gf import Field, LinearCode, dual_and_subcode, gf, is_prime, poly_interpolate, rank
from .qsim import (AMPLITUDE_CAP, LinearIsometry, PureState, RegisterSystem, apply_isometry,
                   permutation_table)

KL_THRESHOLD = 1e-9


class CodeError(ValueError):
    pass


class NotCorrectableError(CodeError):
    def __init__(self, diagnostic: float):
        super().__init__(f"erasures not correctable (diagnostic {diagnostic:.3e})")
        self.diagnostic = diagnostic


# --------------------------------------------------------------------------
# decoder synthesis


@dataclass(frozen=True, eq=False)
class ErasureDecoder:
    isometry: LinearIsometry
    held: tuple[int, ...]
    diagnostic: float
    schmidt_rank: int

    @property
    def out_dims(self) -> tuple[int, ...]:
        return self.isometry.out_dims


def _split(encoder: np.ndarray, dims: Sequence[int], held: Sequence[int]) -> np.ndarray:
    """Encoded basis states as (logical, held, erased) arrays."""
    dims = tuple(dims)
    dL = encoder.shape[1]
    erased = [i for i in range(len(dims)) if i not in held]
    t = encoder.T.reshape((dL,) + dims)
    t = np.transpose(t, [0] + [1 + h for h in held] + [1 + e for e in erased])
    dH = int(np.prod([dims[h] for h in held])) if held else 1
    return t.reshape(dL, dH, -1)


def _kl_analysis(encoder: np.ndarray, dims: Sequence[int], held: Sequence[int]):
    M = _split(encoder, dims, held)
    dL, dH, dE = M.shape
    u, s, vh = np.linalg.svd(M[0], full_matrices=False)
    keep = s > 1e-12
    s, vh = s[keep], vh[keep]
    # h[i, k] = <w_k|Psi_i> / s_k, a vector on the held registers
    h = np.einsum("ihe,ke->ikh", M, vh.conj()) / s[None, :, None]
    r = len(s)
    flat = h.reshape(dL * r, dH)
    gram = flat.conj() @ flat.T
    diag = float(np.max(np.abs(gram - np.eye(dL * r)), initial=0.0))
    recon = np.einsum("k,ikh,ke->ihe", s, h, vh)
    resid = float(np.max(np.abs(recon - M), initial=0.0))
    return max(diag, resid), flat, r, dL, dH


def kl_check(encoder: np.ndarray, dims: Sequence[int], erased: Sequence[int]) -> float:
    """Deviation from the erasure-correction conditions for the erased registers."""
    held = [i for i in range(len(dims)) if i not in set(erased)]
    return _kl_analysis(np.asarray(encoder, complex), dims, held)[0]


def synthesize_erasure_decoder(encoder: np.ndarray, dims: Sequence[int], held: Sequence[int],
                               threshold_: float = KL_THRESHOLD) -> ErasureDecoder:
    """Decoder acting on ``held`` registers that maps the code back to (logical, junk).

    The Schmidt basis of the encoded |0> across held:erased fixes a common
    environment basis; each encoded |i> must then decompose with the same
    environment vectors and orthonormal held vectors h_{i,k}.  The decoder
    sends h_{i,k} to |i>|k> and is completed to an isometry.
    """
    held = tuple(held)
    diag, flat, r, dL, dH = _kl_analysis(np.asarray(encoder, complex), dims, held)
    if diag > threshold_:
        raise NotCorrectableError(diag)
    J = math.ceil(dH / dL)
    out = np.zeros((dL * J, dH), complex)
    # rows indexed by (i, k) in C order over (dL, J)
    for i in range(dL):
        for k in range(r):
            out[i * J + k] = flat[i * r + k].conj()
    comp = complex_null_space(flat.conj()) if dL * r < dH else np.zeros((dH, 0))
    free = [i * J + k for i in range(dL) for k in range(r, J)]
    for col, row in zip(comp.T, free):
        out[row] = col.conj()
    out_dims = (dL,) if J == 1 else (dL, J)
    in_dims = tuple(dims[h] for h in held)
    return ErasureDecoder(LinearIsometry(in_dims, out_dims, out), held, diag, r)


# --------------------------------------------------------------------------
# schemes


@dataclass(frozen=True, eq=False)
class Branch:
    """One copy of the logical qudit encoded into ``registers``."""

    encoder: np.ndarray
    registers: tuple[int, ...]
    realized: AccessStructure


@dataclass(eq=False)
class QECCScheme:
    name: str
    n: int
    logical_dim: int
    register_dims: tuple[int, ...]
    owners: tuple[int | None, ...]
    branches: tuple[Branch, ...]
    classical_bits: int = 0
    _decoders: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.owners) != len(self.register_dims):
            raise CodeError("one owner per register")
        seen = sorted(r for b in self.branches for r in b.registers)
        if seen != list(range(len(self.register_dims))):
            raise CodeError("every register must belong to exactly one branch")
        for b in self.branches:
            bd = [self.register_dims[r] for r in b.registers]
            if b.encoder.shape != (int(np.prod(bd)), self.logical_dim):
                raise CodeError("branch encoder shape mismatch")
            err = np.max(np.abs(b.encoder.conj().T @ b.encoder - np.eye(self.logical_dim)))
            if err > 1e-12:
                raise CodeError(f"branch encoder is not an isometry ({err:.2e})")

    @property
    def copies(self) -> int:
        return len(self.branches)

    @property
    def environment(self) -> tuple[int, ...]:
        return tuple(r for r, o in enumerate(self.owners) if o is None)

    def party_registers(self, i: int) -> tuple[int, ...]:
        return tuple(r for r, o in enumerate(self.owners) if o == i)

    def realized(self) -> TruthTable:
        table = np.zeros(1 << self.n, bool)
        for b in self.branches:
            table |= b.realized.truth_table()
        return TruthTable.from_array(self.n, table)

    def branch_dims(self, b: Branch) -> tuple[int, ...]:
        return tuple(self.register_dims[r] for r in b.registers)

    def size_qubits(self) -> float:
        """Total quantum share size in qubits (log2 of register dimensions held by parties)."""
        return sum(math.log2(d) for d, o in zip(self.register_dims, self.owners) if o is not None)

    def full_encoder(self) -> np.ndarray:
        """Encoder from the copies' logical registers into all registers, global order."""
        V = np.ones((1, 1), complex)
        order: list[int] = []
        for b in self.branches:
            V = np.kron(V, b.encoder)
            order.extend(b.registers)
        dims = [self.register_dims[r] for r in order]
        din = self.logical_dim ** self.copies
        t = V.reshape(tuple(dims) + (din,))
        perm = [order.index(r) for r in range(len(order))] + [len(order)]
        return np.transpose(t, perm).reshape(-1, din)

    def choose_branch(self, P: Sequence[int]) -> int:
        for k, b in enumerate(self.branches):
            if b.realized.evaluate(P):
                return k
        raise NotCorrectableError(float("nan"))

    def decoder(self, P: Sequence[int]) -> tuple[int, ErasureDecoder]:
        """Branch index and decoder for party set P (cached)."""
        k = self.choose_branch(P)
        b = self.branches[k]
        Ps = set(P)
        held = tuple(j for j, r in enumerate(b.registers) if self.owners[r] in Ps)
        key = (k, held)
        if key not in self._decoders:
            self._decoders[key] = synthesize_erasure_decoder(b.encoder, self.branch_dims(b), held)
        return k, self._decoders[key]

    def encode(self, state: PureState, payloads: Sequence[str], prefix: str = "q") -> PureState:
        """Replace the payload registers by all code registers ``q0..``.

        Code registers are appended after the untouched registers, in global
        order.
        """
        if len(payloads) != self.copies:
            raise CodeError(f"scheme consumes {self.copies} copies, got {len(payloads)} payloads")
        for b, lab in zip(self.branches, payloads):
            if state.dims[state.system.index(lab)] != self.logical_dim:
                raise CodeError("payload dimension differs from the logical dimension")
            iso = LinearIsometry((self.logical_dim,), self.branch_dims(b), b.encoder)
            state = apply_isometry(state, iso, [lab], [f"{prefix}{r}" for r in b.registers])
        labels = list(state.system.labels)
        code = [f"{prefix}{r}" for r in range(len(self.register_dims))]
        rest = [l for l in labels if l not in code]
        return state.permute(rest + code)

    def decode(self, state: PureState, P: Sequence[int], out_label: str = "out",
               prefix: str = "q") -> PureState:
        k, dec = self.decoder(P)
        b = self.branches[k]
        targets = [f"{prefix}{b.registers[j]}" for j in dec.held]
        labels = [out_label] + (["junk"] if len(dec.out_dims) == 2 else [])
        if not targets:
            raise CodeError("party set holds no registers of the chosen branch")
        return apply_isometry(state, dec.isometry, targets, labels)


# --------------------------------------------------------------------------
# quantum Shamir


def quantum_shamir(t: int, n: int, q: int) -> QECCScheme:
    """Threshold-t code of length 2t-1 over Z_q, secret in the leading coefficient.

    |s> -> q^{-(t-1)/2} sum_c |f(0), .., f(2t-2)> with
    f(x) = c_0 + .. + c_{t-2} x^{t-2} + s x^{t-1}.  Registers beyond n are
    pre-erased padding owned by the environment.
    """
    if not 2 * t > n >= 1:
        raise CodeError("need n/2 < t")
    if t > n:
        raise CodeError("need t <= n")
    if not is_prime(q) or q < 2 * t - 1 or q < n:
        raise CodeError(f"need a prime q >= max(n, 2t-1), got {q}")
    L = 2 * t - 1
    pts = np.arange(L, dtype=np.int64)
    powers = np.stack([pts ** j % q for j in range(t)])  # (t, L)
    coeffs = np.indices((q,) * (t - 1), dtype=np.int64).reshape(t - 1, -1).T if t > 1 else np.zeros((1, 0), np.int64)
    base = (coeffs @ powers[: t - 1]) % q if t > 1 else np.zeros((1, L), np.int64)
    place = q ** np.arange(L - 1, -1, -1, dtype=np.int64)
    V = np.zeros((q ** L, q), complex)
    amp = q ** (-(t - 1) / 2)
    for s in range(q):
        vals = (base + s * powers[t - 1]) % q
        V[vals @ place, s] = amp
    owners = tuple(i + 1 if i < n else None for i in range(L))
    branch = Branch(V, tuple(range(L)), threshold(t, n))
    return QECCScheme(f"shamir:{t},{n},{q}", n, q, (q,) * L, owners, (branch,))


def quantum_shamir_decoder(scheme: QECCScheme, P: Sequence[int]) -> tuple[np.ndarray, list[int], int]:
    """Analytic decoder as a basis permutation on t held registers.

    Returns (index table, register indices acted on, register that ends up
    holding the secret).  The held values y determine the interpolating
    polynomial; they are mapped to (leading coefficient, values of that
    polynomial at the other canonical points).
    """
    q = scheme.logical_dim
    L = len(scheme.register_dims)
    t = (L + 1) // 2
    used = sorted(P)[:t]
    if len(used) < t:
        raise CodeError(f"{len(used)} shares, threshold {t}")
    regs = [i - 1 for i in used]
    others = [x for x in range(L) if x not in regs][: t - 1]
    F = gf(q)

    def fn(ys):
        poly = poly_interpolate(F, list(zip(regs, ys)))
        return (poly.coefficient(t - 1),) + tuple(poly(x) for x in others)

    return permutation_table((q,) * t, fn), regs, regs[0]


# --------------------------------------------------------------------------
# CSS codes


def _span_vectors(F: Field, basis: Sequence[Sequence[int]], n: int) -> np.ndarray:
    out = []
    for coeffs in itertools.product(range(F.q), repeat=len(basis)):
        v = [0] * n
        for c, row in zip(coeffs, basis):
            if c:
                v = [F.add(a, F.mul(c, b)) for a, b in zip(v, row)]
        out.append(v)
    return np.array(out, dtype=np.int64).reshape(len(out), n)


def css_build(c1: LinearCode, c2: LinearCode) -> QECCScheme:
    """Code spanned by coset states |x + C2^perp> for x in C1 / C2^perp.

    Coset representatives extend a basis of C2^perp to a basis of C1;
    logical index = coefficient tuple of the representative (C order).
    """
    rep = dual_and_subcode(c1, c2)
    if not rep.contained:
        raise CodeError("dual of C2 is not contained in C1")
    F, n = c1.field, c1.n
    d2 = [list(r) for r in rep.dual.generator]
    extra = []
    cur = list(d2)
    for row in c1.generator:
        if rank(F, cur + [list(row)]) > len(cur):
            cur.append(list(row))
            extra.append(list(row))
    k = len(extra)
    if k < 1:
        raise CodeError("logical dimension would be 1")
    q = F.q
    dualvecs = _span_vectors(F, d2, n)
    reps = _span_vectors(F, extra, n)
    place = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    V = np.zeros((q ** n, q ** k), complex)
    amp = 1 / math.sqrt(len(dualvecs))
    for idx, x in enumerate(reps):
        words = np.array([[F.add(int(a), int(b)) for a, b in zip(x, y)] for y in dualvecs], dtype=np.int64)
        V[words @ place, idx] = amp
    dims = (q,) * n
    # realized structure: sets whose complement is correctable
    table = np.zeros(1 << n, bool)
    for mask in range(1 << n):
        held = [i for i in range(n) if mask >> i & 1]
        erased = [i for i in range(n) if not mask >> i & 1]
        table[mask] = kl_check(V, dims, erased) <= KL_THRESHOLD
    realized = TruthTable.from_array(n, table)
    return QECCScheme(f"css:{n},{k}", n, q ** k, dims, tuple(range(1, n + 1)),
                      (Branch(V, tuple(range(n)), realized),))


def codespace_projector(scheme: QECCScheme) -> np.ndarray:
    V = scheme.full_encoder()
    return V @ V.conj().T


# --------------------------------------------------------------------------
# multi-copy, weighted and tree compositions


def copies_required(t: int, n: int) -> int:
    if not 1 <= t <= n:
        raise CodeError("need 1 <= t <= n")
    return max(1, n - 2 * t + 2)


def multicopy_threshold(t: int, n: int, q: int) -> QECCScheme:
    """Threshold t of n from max(1, n-2t+2) copies, one register per party.

    Copy 0 goes through the threshold-t code on parties 1..min(n, 2t-1); each
    party j >= 2t receives one further copy directly (a code realizing x_j).
    """
    if not 1 <= t <= n or 2 * t - 1 > q:
        raise CodeError("need 1 <= t <= n and 2t-1 <= q")
    if 2 * t > n:
        return quantum_shamir(t, n, q)
    base = quantum_shamir(t, 2 * t - 1, q)
    L = len(base.register_dims)
    b0 = base.branches[0]
    branches = [Branch(b0.encoder, b0.registers,
                       MinSets.of(n, [s for s in itertools.combinations(range(1, 2 * t), t)]))]
    owners = list(base.owners)
    for j in range(2 * t, n + 1):
        branches.append(Branch(np.eye(q, dtype=complex), (len(owners),), MinSets.of(n, [[j]])))
        owners.append(j)
    return QECCScheme(f"multicopy:{t},{n},{q}", n, q, (q,) * len(owners), tuple(owners), tuple(branches))


def weighted_expand(inner: QECCScheme, w: WeightFunction) -> QECCScheme:
    """Party i receives w(i) consecutive party slots of ``inner``."""
    if inner.n != w.total:
        raise CodeError(f"inner scheme has {inner.n} slots, weights total {w.total}")
    slot_owner = []
    for i, wi in enumerate(w.weights, 1):
        slot_owner.extend([i] * wi)
    owners = tuple(None if o is None else slot_owner[o - 1] for o in inner.owners)
    n = w.n
    branches = []
    for b in inner.branches:
        inner_table = b.realized.truth_table()
        table = np.zeros(1 << n, bool)
        for mask in range(1 << n):
            slots = 0
            for s, p in enumerate(slot_owner):
                if mask >> (p - 1) & 1:
                    slots |= 1 << s
            table[mask] = inner_table[slots]
        branches.append(Branch(b.encoder, b.registers, TruthTable.from_array(n, table)))
    return QECCScheme(f"weighted({inner.name})", n, inner.logical_dim, inner.register_dims, owners,
                      tuple(branches))


def tree_qecc(tree: MonotoneCircuit, q: int) -> QECCScheme:
    """Compose per-gate threshold codes down a tree of threshold gates.

    Each gate with k points and threshold t uses the threshold code
    (t, k) over Z_q; each share headed for a sub-gate is re-encoded by that
    sub-gate's code.  Weighted inputs receive one share per unit of weight.
    """
    if not tree.is_tree():
        raise CodeError("circuit is not a tree (some wire feeds two gates)")
    gm = tree.gate_map
    for g in tree.gates:
        pts = sum(g.input_weights)
        if pts == 1:
            continue
        if not 2 * g.threshold > pts:
            raise CodeError(f"gate {g.id} (threshold {g.threshold} of {pts}) is not no-cloning")
    labels_order: list[str] = []
    owners: list[int | None] = []
    counter = itertools.count()

    def expand(state: PureState, label: str, gid: str) -> PureState:
        g = gm[gid]
        pts = sum(g.input_weights)
        slot_ops = [op for op, w in zip(g.operands, g.input_weights) for _ in range(w)]
        if pts == 1:
            return place(state, label, slot_ops[0])
        code = quantum_shamir(g.threshold, pts, q)
        b = code.branches[0]
        outs = [f"t{next(counter)}" for _ in b.registers]
        iso = LinearIsometry((q,), code.branch_dims(b), b.encoder)
        state = apply_isometry(state, iso, [label], outs)
        for r, lab in enumerate(outs):
            if r < pts:
                state = place(state, lab, slot_ops[r])
            else:
                labels_order.append(lab)
                owners.append(None)
        return state

    def place(state: PureState, label: str, op: str) -> PureState:
        v = var_index(op)
        if v is not None:
            labels_order.append(label)
            owners.append(v)
            return state
        return expand(state, label, op)

    columns = []
    final_order = None
    for s in range(q):
        labels_order.clear()
        owners.clear()
        counter = itertools.count()
        a = np.zeros(q, complex)
        a[s] = 1
        st = expand(PureState(RegisterSystem(("root",), (q,)), a), "root", tree.output)
        st = st.permute(labels_order)
        if final_order is None:
            final_order = list(labels_order)
            final_owners = tuple(owners)
        columns.append(st.amplitudes)
    V = np.stack(columns, axis=1)
    if V.shape[0] > AMPLITUDE_CAP:
        raise CodeError("composite dimension exceeds the cap")
    L = len(final_order)
    return QECCScheme(f"tree({tree.output})", tree.n, q, (q,) * L, final_owners,
                      (Branch(V, tuple(range(L)), tree),))


# --------------------------------------------------------------------------
# long-message parameters


@dataclass(frozen=True)
class LongMessageParams:
    n: int
    t: int
    m: int
    n_star: float
    c: int
    N: int
    r: int
    K: int

    @property
    def rate_ok(self) -> bool:
        """2K - N >= ceil(m / r)."""
        return 2 * self.K - self.N >= math.ceil(self.m / self.r)

    @property
    def distance_ok(self) -> bool:
        """N - K >= c (n - t)."""
        return self.N - self.K >= self.c * (self.n - self.t)

    @property
    def ok(self) -> bool:
        return self.rate_ok and self.distance_ok

    @property
    def ratio(self) -> float:
        """Quantum information ratio N r / (m n)."""
        return self.N * self.r / (self.m * self.n)

    @property
    def ratio_bound(self) -> float:
        return 32 / (2 * self.t - self.n)


def _solve_xlogx(target: float, tol: float = 1e-9) -> float:
    lo, hi = 1.0, 2.0
    while hi * math.log2(hi) < target:
        hi *= 2
    while hi - lo > tol * max(1.0, lo):
        mid = (lo + hi) / 2
        if mid * math.log2(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def long_message_params(n: int, t: int, m: int) -> LongMessageParams:
    """Code parameters for sharing an m-qubit secret at threshold t of n.

    N* solves x log2 x = 2mn / (t - n/2); c = ceil(N*/n), N = cn,
    r = ceil(log2 N) and K = ceil(nc/2 + ceil(m/r)/2).
    """
    if not n >= t > n / 2:
        raise CodeError("need n >= t > n/2")
    if m < 1:
        raise CodeError("need m >= 1")
    n_star = _solve_xlogx(2 * m * n / (t - n / 2))
    c = math.ceil(n_star / n)
    N = c * n
    r = max(1, math.ceil(math.log2(N)))
    K = math.ceil(n * c / 2 + math.ceil(m / r) / 2)
    return LongMessageParams(n, t, m, n_star, c, N, r, K)


def min_message_length(n: int, t: int, scan: int = 4096) -> int:
    """Smallest m after which every scanned m satisfies both inequalities."""
    last_fail = 0
    for m in range(1, scan + 1):
        if not long_message_params(n, t, m).ok:
            last_fail = m
    return last_fail + 1
