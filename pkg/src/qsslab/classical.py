"""Classical secret sharing over explicit randomness tapes.

Every scheme declares its tape as a tuple of moduli; position ``j`` of a tape
holds an integer in ``[0, moduli[j])``.  Shares are tuples of integers, each
with a declared modulus, so exact enumeration and share-size
accounting work uniformly across schemes.

Schemes:

* :class:`ShamirScheme` - componentwise Shamir over a finite field.
* :class:`FormulaScheme` - perfect scheme from a monotone formula
  (AND: additive split, OR: replication, threshold: Shamir).
* :class:`LeakyScheme` - formula scheme that publishes the secret with an
  exactly known probability; used to measure statistical lifting.
* :class:`YaoScheme` - wire-key scheme over a monotone circuit with a
  pluggable PRG.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .access import (AccessStructure, Gate, MinSets, MonotoneCircuit, TruthTable, analyze,
                     from_mask, to_mask, var_index)
from .gf import Field, gf, gf2, next_prime, poly_interpolate

EXACT_TAPE_CAP = 1 << 24


class UnauthorizedError(ValueError):
    """The given parties cannot reconstruct."""


class SchemeError(ValueError):
    pass


# --------------------------------------------------------------------------
# PRG


def prg(seed: bytes, length: int, backend: str = "shake128", tag: bytes = b"") -> bytes:
    """Deterministic expansion of ``tag || seed`` to ``length`` bytes.

    ``toy-lcg`` is a linear congruential generator kept only for tiny
    enumeration experiments; it offers no security.
    """
    if length < 0:
        raise SchemeError("negative output length")
    if length == 0:
        return b""
    if backend == "shake128":
        return hashlib.shake_128(len(tag).to_bytes(2, "big") + tag + seed).digest(length)
    if backend == "toy-lcg":
        state = int.from_bytes(hashlib.sha256(tag + seed).digest()[:8], "big")
        out = bytearray()
        for _ in range(length):
            state = (6364136223846793005 * state + 1442695040888963407) % (1 << 64)
            out.append(state >> 56)
        return bytes(out)
    raise SchemeError(f"unknown PRG backend {backend!r}")


def prg_bits(seed: int, seed_bits: int, out_bits: int, backend: str, tag: str) -> int:
    raw = prg(seed.to_bytes(max(1, (seed_bits + 7) // 8), "big"), (out_bits + 7) // 8,
              backend, tag.encode())
    return int.from_bytes(raw, "big") & ((1 << out_bits) - 1) if out_bits else 0


# --------------------------------------------------------------------------
# tapes and share vectors


@dataclass(frozen=True)
class Tape:
    """Either explicit values or a 64-bit seed expanded deterministically."""

    seed: int | None = None
    values: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.seed is None) == (self.values is None):
            raise SchemeError("a tape has either a seed or explicit values")
        if self.seed is not None and not 0 <= self.seed < 1 << 64:
            raise SchemeError("seed must be a 64-bit unsigned integer")

    def draw(self, moduli: Sequence[int]) -> tuple[int, ...]:
        if self.values is not None:
            if len(self.values) != len(moduli):
                raise SchemeError(f"tape has {len(self.values)} values, scheme needs {len(moduli)}")
            for v, m in zip(self.values, moduli):
                if not 0 <= v < m:
                    raise SchemeError(f"tape value {v} outside [0, {m})")
            return tuple(self.values)
        rng = random.Random(self.seed)
        return tuple(rng.randrange(m) for m in moduli)

    def to_json(self) -> dict:
        return {"seed": self.seed} if self.seed is not None else {"explicit": list(self.values)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "Tape":
        if "seed" in obj:
            return cls(seed=int(obj["seed"]))
        return cls(values=tuple(int(v) for v in obj["explicit"]))


def _elem_bytes(m: int) -> int:
    return max(1, ((m - 1).bit_length() + 7) // 8)


@dataclass(frozen=True)
class ShareVector:
    shares: dict[int, tuple[int, ...]]
    moduli: dict[int, tuple[int, ...]]
    public: tuple[int, ...] = ()
    public_moduli: tuple[int, ...] = ()

    def party_bytes(self, i: int) -> bytes:
        return b"".join(v.to_bytes(_elem_bytes(m), "big") for v, m in zip(self.shares[i], self.moduli[i]))

    def public_bytes(self) -> bytes:
        return b"".join(v.to_bytes(_elem_bytes(m), "big") for v, m in zip(self.public, self.public_moduli))

    def share_bits(self, i: int) -> int:
        """ceil(log2 |S_i|) for the declared share domain of party i."""
        size = math.prod(self.moduli[i])
        return (size - 1).bit_length() if size > 1 else 0

    @property
    def size(self) -> int:
        return sum(self.share_bits(i) for i in self.shares)

    def restrict(self, P: Iterable[int]) -> dict[int, tuple[int, ...]]:
        return {i: self.shares[i] for i in P}


def decode_bytes(data: bytes, moduli: Sequence[int]) -> tuple[int, ...]:
    out, pos = [], 0
    for m in moduli:
        k = _elem_bytes(m)
        out.append(int.from_bytes(data[pos:pos + k], "big"))
        pos += k
    if pos != len(data):
        raise SchemeError("share bytes do not match the declared domain")
    return tuple(out)


# --------------------------------------------------------------------------
# base class


class ClassicalScheme:
    structure: AccessStructure
    kind: str
    secret_modulus: int

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def tape_moduli(self) -> tuple[int, ...]:
        raise NotImplementedError

    def share_with(self, secret: int, tape_values: Sequence[int]) -> ShareVector:
        raise NotImplementedError

    def share(self, secret: int, tape: Tape | Sequence[int]) -> ShareVector:
        if not 0 <= secret < self.secret_modulus:
            raise SchemeError(f"secret {secret} outside [0, {self.secret_modulus})")
        values = tape.draw(self.tape_moduli) if isinstance(tape, Tape) else tuple(tape)
        return self.share_with(secret, values)

    def reconstruct(self, shares: Mapping[int, Sequence[int]], public: Sequence[int] = ()) -> int:
        raise NotImplementedError

    def size(self) -> int:
        """Total share size in bits, summed over parties."""
        sv = self.share(0, [0] * len(self.tape_moduli))
        return sv.size

    def relevant_tape(self, P: Iterable[int]) -> list[int]:
        return list(range(len(self.tape_moduli)))

    def view(self, P: Sequence[int], secret: int, tape_values: Sequence[int]) -> tuple[int, ...]:
        sv = self.share_with(secret, tape_values)
        out: list[int] = []
        for i in sorted(P):
            out.extend(sv.shares[i])
        out.extend(sv.public)
        return tuple(out)

    def view_batch(self, P: Sequence[int], secret: int, tapes: np.ndarray) -> np.ndarray:
        """Views for every tape row; generic (slow) path."""
        rows = [self.view(P, secret, tuple(int(v) for v in row)) for row in tapes]
        return np.array(rows, dtype=np.int64).reshape(len(rows), -1)


def row_codes(rows: np.ndarray) -> tuple[np.ndarray, int]:
    """Label equal rows of a non-negative integer matrix with 0..k-1.

    Columns are folded into one int64 key in mixed radix; whenever the next
    fold could overflow, the key is first compressed to dense labels.  This
    is much faster than ``np.unique(axis=0)`` on millions of rows.
    """
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64), 1
    key = np.zeros(rows.shape[0], dtype=np.int64)
    span = 1
    for col in rows.T:
        base = int(col.max()) + 1 if col.size else 1
        if span * base >= 1 << 62:
            uniq, key = np.unique(key, return_inverse=True)
            key = key.reshape(-1).astype(np.int64)
            span = len(uniq)
        key = key * base + col
        span *= base
    uniq, inverse = np.unique(key, return_inverse=True)
    return inverse.reshape(-1).astype(np.int64), len(uniq)


def _tape_grid(moduli: Sequence[int], positions: Sequence[int], total: int) -> np.ndarray:
    sub = [moduli[p] for p in positions]
    count = math.prod(sub)
    grid = np.zeros((count, total), dtype=np.int64)
    if positions:
        idx = np.indices(sub, dtype=np.int64).reshape(len(sub), -1).T
        grid[:, positions] = idx
    return grid


@dataclass(frozen=True)
class ViewCounts:
    """counts[v, s] = number of relevant tapes giving view v for secret s.

    ``multiplier`` is the number of irrelevant tape completions, so every
    count stands for ``multiplier`` full tapes.
    """

    counts: np.ndarray
    tapes: int
    multiplier: int


def view_counts(scheme: ClassicalScheme, P: Sequence[int], secrets: Sequence[int],
                cap: int = EXACT_TAPE_CAP) -> ViewCounts:
    """Exact joint view distribution of coalition P for each secret."""
    moduli = scheme.tape_moduli
    rel = sorted(scheme.relevant_tape(P))
    R = math.prod(moduli[p] for p in rel)
    if R * len(secrets) > cap:
        raise SchemeError(f"{R * len(secrets)} (tape, secret) pairs exceed the exact cap {cap}")
    grid = _tape_grid(moduli, rel, len(moduli))
    codes_per_secret = []
    for s in secrets:
        views = scheme.view_batch(P, s, grid)
        codes_per_secret.append(views)
    allviews = np.concatenate(codes_per_secret, axis=0)
    inverse, nviews = row_codes(allviews)
    counts = np.zeros((nviews, len(secrets)), dtype=np.int64)
    sec_idx = np.repeat(np.arange(len(secrets)), R)
    np.add.at(counts, (inverse, sec_idx), 1)
    full = math.prod(moduli)
    return ViewCounts(counts, R, full // R)


def privacy_distance(vc: ViewCounts) -> float:
    """Max statistical distance between the view distributions of any two secrets."""
    p = vc.counts / vc.tapes
    best = 0.0
    for a, b in itertools.combinations(range(p.shape[1]), 2):
        best = max(best, 0.5 * float(np.abs(p[:, a] - p[:, b]).sum()))
    return best


# --------------------------------------------------------------------------
# Shamir


def _digits(value: int, base: int, width: int) -> list[int]:
    out = []
    for _ in range(width):
        value, r = divmod(value, base)
        out.append(r)
    return out


class ShamirScheme(ClassicalScheme):
    """Threshold t of n; each secret digit in GF(q) is shared independently.

    Party i holds f(i) for each component, with f(x) = s + sum_j tape_j x^j.
    """

    kind = "shamir"

    def __init__(self, t: int, n: int, F: Field, width: int = 1):
        if not 1 <= t <= n:
            raise SchemeError("need 1 <= t <= n")
        if n >= F.q:
            raise SchemeError(f"need n < q (n={n}, q={F.q})")
        self.t, self.F, self.width = t, F, width
        from .access import threshold
        self.structure = threshold(t, n)
        self.secret_modulus = F.q ** width

    @classmethod
    def for_modulus(cls, t: int, n: int, modulus: int, q: int | None = None) -> "ShamirScheme":
        q = next_prime(n + 1) if q is None else q
        F = gf(q)
        width = max(1, math.ceil(math.log(modulus, q) - 1e-12)) if modulus > 1 else 1
        while q ** width < modulus:
            width += 1
        return cls(t, n, F, width)

    @property
    def tape_moduli(self):
        return (self.F.q,) * (self.width * (self.t - 1))

    def share_with(self, secret, tape_values):
        F, t = self.F, self.t
        digits = _digits(secret, F.q, self.width)
        shares = {i: [] for i in range(1, self.n + 1)}
        for c, s in enumerate(digits):
            coeffs = [s] + list(tape_values[c * (t - 1):(c + 1) * (t - 1)])
            for i in range(1, self.n + 1):
                acc = 0
                for a in reversed(coeffs):
                    acc = F.add(F.mul(acc, i), a)
                shares[i].append(acc)
        return ShareVector({i: tuple(v) for i, v in shares.items()},
                           {i: (F.q,) * self.width for i in shares})

    def reconstruct(self, shares, public=()):
        P = sorted(shares)
        if len(P) < self.t:
            raise UnauthorizedError(f"{len(P)} shares, threshold {self.t}")
        use = P[: self.t]
        value = 0
        for c in reversed(range(self.width)):
            poly = poly_interpolate(self.F, [(i, shares[i][c]) for i in use])
            value = value * self.F.q + poly.coefficient(0)
        return value

    def relevant_tape(self, P):
        return list(range(len(self.tape_moduli))) if P else []

    def view_batch(self, P, secret, tapes):
        if self.F.binary:
            return super().view_batch(P, secret, tapes)
        q, t = self.F.q, self.t
        digits = _digits(secret, q, self.width)
        cols = []
        for i in sorted(P):
            for c, s in enumerate(digits):
                acc = np.zeros(len(tapes), dtype=np.int64)
                for j in reversed(range(t - 1)):
                    acc = (acc * i + tapes[:, c * (t - 1) + j]) % q
                acc = (acc * i + s) % q
                cols.append(acc)
        return np.stack(cols, axis=1) if cols else np.zeros((len(tapes), 0), np.int64)


def shamir_share(secret: int, t: int, n: int, F: Field, tape) -> ShareVector:
    return ShamirScheme(t, n, F).share(secret, tape)


def shamir_rec(shares: Mapping[int, int], t: int, n: int, F: Field) -> int:
    return ShamirScheme(t, n, F).reconstruct({i: (v,) for i, v in shares.items()})


# --------------------------------------------------------------------------
# formula scheme


@dataclass(frozen=True)
class Node:
    """Share-tree node: LEAF(party), AND, OR or SHAMIR(t) over point-children."""

    kind: str
    children: tuple["Node", ...] = ()
    party: int = 0
    t: int = 0

    def parties(self) -> frozenset[int]:
        if self.kind == "LEAF":
            return frozenset([self.party])
        return frozenset().union(*(c.parties() for c in self.children))


def share_tree(f: AccessStructure) -> Node:
    """Expand a structure into a formula tree (DAGs are duplicated into trees)."""
    if isinstance(f, MonotoneCircuit):
        gm = f.gate_map

        def build(op: str) -> Node:
            v = var_index(op)
            if v is not None:
                return Node("LEAF", party=v)
            g = gm[op]
            kids = [build(o) for o in g.operands]
            if g.kind == "AND":
                return Node("AND", tuple(kids)) if len(kids) > 1 else kids[0]
            if g.kind == "OR":
                return Node("OR", tuple(kids)) if len(kids) > 1 else kids[0]
            pts = []
            for k, w in zip(kids, g.input_weights):
                pts.extend([k] * w)
            return Node("SHAMIR", tuple(pts), t=g.threshold)

        return build(f.output)
    sets = f.sets if isinstance(f, MinSets) else f.minimal_sets()
    sets = [sorted(s) for s in sets]
    if any(not s for s in sets):
        raise SchemeError("structures authorizing the empty set cannot be shared")
    if not sets:
        raise SchemeError("structure authorizes nothing")
    clauses = [Node("AND", tuple(Node("LEAF", party=i) for i in s)) if len(s) > 1
               else Node("LEAF", party=s[0]) for s in sets]
    return Node("OR", tuple(clauses)) if len(clauses) > 1 else clauses[0]


class _TapeCursor:
    def __init__(self, tapes: np.ndarray | None):
        self.tapes = tapes
        self.pos = 0
        self.layout: list[tuple[int, frozenset[int]]] = []

    def take(self, modulus: int, parties: frozenset[int]) -> np.ndarray | int:
        self.layout.append((modulus, parties))
        j = self.pos
        self.pos += 1
        if self.tapes is None:
            return 0
        return self.tapes[:, j]


class FormulaScheme(ClassicalScheme):
    """Perfect scheme from a monotone formula over Z_M.

    AND splits additively mod the current modulus, OR hands every child the
    same value, and a threshold gate with k points Shamir-shares over the
    smallest prime p >= max(current modulus, k+1); its subtrees then work mod p.
    """

    kind = "formula"

    def __init__(self, f: AccessStructure, modulus: int):
        if modulus < 2:
            raise SchemeError("secret modulus must be >= 2")
        if f.n <= 20 and not analyze(f).monotone:
            raise SchemeError("structure is not monotone")
        self.structure = f
        self.secret_modulus = modulus
        self.tree = share_tree(f)
        cur = _TapeCursor(None)
        leaves: dict[int, list] = {}
        self._walk(self.tree, 0, modulus, cur, leaves)
        self._layout = tuple(cur.layout)
        self.share_lengths = {i: len(leaves.get(i, [])) for i in range(1, f.n + 1)}

    @property
    def tape_moduli(self):
        return tuple(m for m, _ in self._layout)

    def _walk(self, node: Node, s, m: int, cur: _TapeCursor, out: dict[int, list]):
        if node.kind == "LEAF":
            out.setdefault(node.party, []).append((s, m))
            return
        if node.kind == "OR":
            for c in node.children:
                self._walk(c, s, m, cur, out)
            return
        if node.kind == "AND":
            k = len(node.children)
            last_parties = node.children[-1].parties()
            parts, acc = [], 0
            for c in node.children[:-1]:
                r = cur.take(m, c.parties() | last_parties)
                parts.append(r)
                acc = acc + r
            parts.append((s - acc) % m)
            for c, v in zip(node.children, parts):
                self._walk(c, v, m, cur, out)
            return
        # SHAMIR
        k = len(node.children)
        p = next_prime(max(m, k + 1))
        allp = node.parties()
        coeffs = [cur.take(p, allp) for _ in range(node.t - 1)]
        for x, c in enumerate(node.children, 1):
            acc = 0
            for a in reversed(coeffs):
                acc = (acc + a) * x % p
            self._walk(c, (acc + s) % p, p, cur, out)

    def _share_arrays(self, secret: int, tapes: np.ndarray) -> dict[int, list]:
        cur = _TapeCursor(tapes)
        out: dict[int, list] = {}
        self._walk(self.tree, np.full(len(tapes), secret, dtype=np.int64), self.secret_modulus, cur, out)
        return out

    def share_with(self, secret, tape_values):
        tapes = np.array([tape_values], dtype=np.int64).reshape(1, -1)
        out = self._share_arrays(secret, tapes)
        shares, moduli = {}, {}
        for i in range(1, self.n + 1):
            elems = out.get(i, [])
            shares[i] = tuple(int(np.asarray(v).reshape(-1)[0]) for v, _ in elems)
            moduli[i] = tuple(mm for _, mm in elems)
        return ShareVector(shares, moduli)

    def view_batch(self, P, secret, tapes):
        out = self._share_arrays(secret, tapes)
        cols = []
        for i in sorted(P):
            for v, _ in out.get(i, []):
                cols.append(np.broadcast_to(np.asarray(v, dtype=np.int64), (len(tapes),)))
        return np.stack(cols, axis=1) if cols else np.zeros((len(tapes), 0), np.int64)

    def relevant_tape(self, P):
        P = set(P)
        return [j for j, (_, parties) in enumerate(self._layout) if parties & P]

    def reconstruct(self, shares, public=()):
        cursor = {i: 0 for i in shares}

        def rec(node: Node, m: int):
            if node.kind == "LEAF":
                if node.party not in shares:
                    return None
                v = shares[node.party][cursor[node.party]]
                cursor[node.party] += 1
                return v
            if node.kind == "OR":
                vals = [rec(c, m) for c in node.children]
                return next((v for v in vals if v is not None), None)
            if node.kind == "AND":
                vals = [rec(c, m) for c in node.children]
                return None if any(v is None for v in vals) else sum(vals) % m
            p = next_prime(max(m, len(node.children) + 1))
            vals = [rec(c, p) for c in node.children]
            pts = [(x, v) for x, v in enumerate(vals, 1) if v is not None]
            if len(pts) < node.t:
                return None
            return poly_interpolate(gf(p), pts[: node.t]).coefficient(0)

        value = rec(self.tree, self.secret_modulus)
        if value is None:
            raise UnauthorizedError("parties do not satisfy the formula")
        if value >= self.secret_modulus:
            raise SchemeError("reconstructed value outside the secret range (corrupted shares?)")
        return value


def formula_share(secret: int, f: AccessStructure, modulus: int, tape) -> ShareVector:
    return FormulaScheme(f, modulus).share(secret, tape)


# --------------------------------------------------------------------------
# leaky scheme


class LeakyScheme(ClassicalScheme):
    """Formula scheme that, with probability exactly eps, appends the secret to every share.

    The first tape position is uniform modulo the denominator of eps and the
    leak happens iff it is below the numerator.  For eps > 0 every share
    carries two extra elements (leak flag, leaked value), so the share domain
    does not depend on the tape.
    """

    kind = "leaky"

    def __init__(self, f: AccessStructure, modulus: int, eps: Fraction | float | str):
        eps = Fraction(eps).limit_denominator(1 << 20)
        if not 0 <= eps <= 1:
            raise SchemeError("eps must lie in [0, 1]")
        self.eps = eps
        self.base = FormulaScheme(f, modulus)
        self.structure = f
        self.secret_modulus = modulus

    @property
    def tape_moduli(self):
        if self.eps == 0:
            return self.base.tape_moduli
        return (self.eps.denominator,) + self.base.tape_moduli

    def share_with(self, secret, tape_values):
        if self.eps == 0:
            return self.base.share_with(secret, tape_values)
        leak = tape_values[0] < self.eps.numerator
        sv = self.base.share_with(secret, tape_values[1:])
        extra = (1, secret) if leak else (0, 0)
        return ShareVector({i: v + extra for i, v in sv.shares.items()},
                           {i: m + (2, self.secret_modulus) for i, m in sv.moduli.items()})

    def reconstruct(self, shares, public=()):
        if self.eps == 0:
            return self.base.reconstruct(shares)
        for v in shares.values():
            if v[-2] == 1:
                return v[-1]
        return self.base.reconstruct({i: v[:-2] for i, v in shares.items()})

    def relevant_tape(self, P):
        if self.eps == 0:
            return self.base.relevant_tape(P)
        return [0] + [j + 1 for j in self.base.relevant_tape(P)] if P else []

    def view_batch(self, P, secret, tapes):
        if self.eps == 0:
            return self.base.view_batch(P, secret, tapes)
        base = self.base.view_batch(P, secret, tapes[:, 1:])
        leak = (tapes[:, 0] < self.eps.numerator).astype(np.int64)
        if not P:
            return base
        # same element order as share_with: base elements, then (flag, value)
        cols, pos = [], 0
        for i in sorted(P):
            k = self.base.share_lengths[i]
            cols.append(base[:, pos:pos + k])
            cols.append(np.stack([leak, leak * secret], axis=1))
            pos += k
        return np.concatenate(cols, axis=1)


def leaky_share(secret: int, f: AccessStructure, modulus: int, eps, tape) -> ShareVector:
    return LeakyScheme(f, modulus, eps).share(secret, tape)


# --------------------------------------------------------------------------
# Yao wire-key scheme


def _block_bits(lam: int, points: int) -> int:
    b = max(1, math.ceil(math.log2(lam))) + 1
    while (1 << b) <= points:
        b += 1
    return b


class YaoScheme(ClassicalScheme):
    """Wire-key secret sharing over a monotone circuit.

    Every variable and gate output wire carries a lam-bit key; party i holds
    the key of wire x_i.  Public ciphertexts let input keys unlock output keys:

    * OR: one ciphertext k_out XOR PRG(k_in) per input;
    * AND: a single ciphertext k_out XOR PRG_1(k_1) XOR ... XOR PRG_k(k_k);
    * TH/WTH: k_out is cut into b-bit blocks, each Shamir-shared over GF(2^b)
      with 2^b larger than the number of points; input j publishes its
      points XOR PRG(k_j).

    The secret is published as s XOR PRG(k_output).  PRG calls are domain
    separated by gate id and input position.
    """

    kind = "yao"

    def __init__(self, circuit: MonotoneCircuit, lam: int, secret_modulus: int, backend: str = "shake128"):
        if lam < 1:
            raise SchemeError("lambda must be positive")
        self.structure = circuit
        self.circuit = circuit
        self.lam = lam
        self.secret_modulus = secret_modulus
        self.secret_bits = max(1, (secret_modulus - 1).bit_length())
        self.backend = backend
        self._layout: list[tuple[str, int]] = []  # (name, modulus)
        self._pos: dict[str, int] = {}
        for i in range(1, circuit.n + 1):
            self._add(f"k:x{i}", 1 << lam)
        for g in circuit.gates:
            self._add(f"k:{g.id}", 1 << lam)
            if g.kind in ("TH", "WTH"):
                pts = sum(g.input_weights)
                b = _block_bits(lam, pts)
                for blk in range(math.ceil(lam / b)):
                    for j in range(1, g.threshold):
                        self._add(f"c:{g.id}:{blk}:{j}", 1 << b)

    def _add(self, name, modulus):
        self._pos[name] = len(self._layout)
        self._layout.append((name, modulus))

    @property
    def tape_moduli(self):
        return tuple(m for _, m in self._layout)

    def _prg(self, key: int, nbits: int, tag: str) -> int:
        return prg_bits(key, self.lam, nbits, self.backend, tag)

    def _th_points(self, g: Gate, k_out: int, tape) -> list[list[int]]:
        """Per input, the list of b-bit block strings of its Shamir points."""
        pts = sum(g.input_weights)
        b = _block_bits(self.lam, pts)
        F = gf2(b)
        nblk = math.ceil(self.lam / b)
        values = [[0] * nblk for _ in range(pts)]
        for blk in range(nblk):
            s = (k_out >> (blk * b)) & ((1 << b) - 1)
            coeffs = [s] + [tape[self._pos[f"c:{g.id}:{blk}:{j}"]] for j in range(1, g.threshold)]
            for x in range(1, pts + 1):
                acc = 0
                for a in reversed(coeffs):
                    acc = F.add(F.mul(acc, x), a)
                values[x - 1][blk] = acc
        return values, b, nblk

    def _ciphertexts(self, tape) -> list[tuple[str, int, int]]:
        """(label, value, bit-length) for every public gate ciphertext."""
        key = lambda w: tape[self._pos[f"k:{w}"]]
        out = []
        for g in self.circuit.gates:
            k_out = key(g.id)
            if g.kind == "OR":
                for j, op in enumerate(g.operands):
                    out.append((f"{g.id}:{j}", k_out ^ self._prg(key(op), self.lam, f"{g.id}:{j}"), self.lam))
            elif g.kind == "AND":
                c = k_out
                for j, op in enumerate(g.operands):
                    c ^= self._prg(key(op), self.lam, f"{g.id}:{j}")
                out.append((f"{g.id}", c, self.lam))
            else:
                values, b, nblk = self._th_points(g, k_out, tape)
                x = 0
                for j, (op, w) in enumerate(zip(g.operands, g.input_weights)):
                    bits = w * nblk * b
                    if w == 0:
                        continue
                    payload = 0
                    for p in range(x, x + w):
                        for blk in range(nblk):
                            payload = (payload << b) | values[p][blk]
                    x += w
                    out.append((f"{g.id}:{j}", payload ^ self._prg(key(op), bits, f"{g.id}:{j}"), bits))
        return out

    # ---- vectorized views ------------------------------------------------

    def _prg_table(self, nbits: int, tag: str) -> np.ndarray:
        """PRG output for every lam-bit key, as an int64 lookup table."""
        cache = self.__dict__.setdefault("_tables", {})
        if (nbits, tag) not in cache:
            cache[(nbits, tag)] = np.array([self._prg(k, nbits, tag) for k in range(1 << self.lam)],
                                           dtype=np.int64)
        return cache[(nbits, tag)]

    @cached_property
    def _batchable(self) -> bool:
        if self.lam > 16 or self.secret_bits > 62:
            return False
        for g in self.circuit.gates:
            if g.kind in ("TH", "WTH"):
                pts = sum(g.input_weights)
                b = _block_bits(self.lam, pts)
                if b > 8 or max(g.input_weights) * math.ceil(self.lam / b) * b > 62:
                    return False
        return True

    def public_batch(self, secret: int, tapes: np.ndarray) -> list[np.ndarray]:
        """Every public value (gate ciphertexts, then the secret ciphertext) per tape row."""
        key = lambda w: tapes[:, self._pos[f"k:{w}"]]
        out = []
        for g in self.circuit.gates:
            k_out = key(g.id)
            if g.kind == "OR":
                for j, op in enumerate(g.operands):
                    out.append(k_out ^ self._prg_table(self.lam, f"{g.id}:{j}")[key(op)])
            elif g.kind == "AND":
                c = k_out.copy()
                for j, op in enumerate(g.operands):
                    c ^= self._prg_table(self.lam, f"{g.id}:{j}")[key(op)]
                out.append(c)
            else:
                pts = sum(g.input_weights)
                b = _block_bits(self.lam, pts)
                F = gf2(b)
                mul = np.array([[F.mul(u, v) for v in range(1 << b)] for u in range(1 << b)], dtype=np.int64)
                nblk = math.ceil(self.lam / b)
                values = [[None] * nblk for _ in range(pts)]
                for blk in range(nblk):
                    sec = (k_out >> (blk * b)) & ((1 << b) - 1)
                    coeffs = [sec] + [tapes[:, self._pos[f"c:{g.id}:{blk}:{j}"]] for j in range(1, g.threshold)]
                    for x in range(1, pts + 1):
                        acc = np.zeros(len(tapes), dtype=np.int64)
                        for a in reversed(coeffs):
                            acc = mul[acc, x] ^ a
                        values[x - 1][blk] = acc
                x = 0
                for j, (op, w) in enumerate(zip(g.operands, g.input_weights)):
                    if w == 0:
                        continue
                    payload = np.zeros(len(tapes), dtype=np.int64)
                    for pnt in range(x, x + w):
                        for blk in range(nblk):
                            payload = (payload << b) | values[pnt][blk]
                    x += w
                    out.append(payload ^ self._prg_table(w * nblk * b, f"{g.id}:{j}")[key(op)])
        root = key(self.circuit.output)
        out.append(secret ^ self._prg_table(self.secret_bits, "out")[root])
        return out

    def view_batch(self, P, secret, tapes):
        if not self._batchable:
            return super().view_batch(P, secret, tapes)
        cols = [tapes[:, self._pos[f"k:x{i}"]] for i in sorted(P)] + self.public_batch(secret, tapes)
        return np.stack(cols, axis=1).astype(np.int64)

    def share_with(self, secret, tape_values):
        tape = tuple(tape_values)
        cts = self._ciphertexts(tape)
        k_root = tape[self._pos[f"k:{self.circuit.output}"]]
        out_ct = secret ^ self._prg(k_root, self.secret_bits, "out")
        public = tuple(v for _, v, _ in cts) + (out_ct,)
        pmod = tuple(1 << bits for _, _, bits in cts) + (1 << self.secret_bits,)
        shares = {i: (tape[self._pos[f"k:x{i}"]],) for i in range(1, self.n + 1)}
        return ShareVector(shares, {i: (1 << self.lam,) for i in shares}, public, pmod)

    def reconstruct(self, shares, public=()):
        keys: dict[str, int] = {f"x{i}": v[0] for i, v in shares.items()}
        cts = list(public)
        idx = 0
        layout = []
        for g in self.circuit.gates:
            if g.kind == "OR":
                layout.append([(idx + j) for j in range(len(g.operands))])
                idx += len(g.operands)
            elif g.kind == "AND":
                layout.append([idx])
                idx += 1
            else:
                nz = [j for j, w in enumerate(g.input_weights) if w]
                layout.append(nz)
                idx += len(nz)
        if len(cts) != idx + 1:
            raise SchemeError("public data has the wrong number of ciphertexts")
        idx = 0
        for g in self.circuit.gates:
            if g.kind == "OR":
                for j, op in enumerate(g.operands):
                    if op in keys and g.id not in keys:
                        keys[g.id] = cts[idx + j] ^ self._prg(keys[op], self.lam, f"{g.id}:{j}")
                idx += len(g.operands)
            elif g.kind == "AND":
                if all(op in keys for op in g.operands):
                    c = cts[idx]
                    for j, op in enumerate(g.operands):
                        c ^= self._prg(keys[op], self.lam, f"{g.id}:{j}")
                    keys[g.id] = c
                idx += 1
            else:
                pts_total = sum(g.input_weights)
                b = _block_bits(self.lam, pts_total)
                F = gf2(b)
                nblk = math.ceil(self.lam / b)
                points: list[tuple[int, list[int]]] = []
                x = 1
                for j, (op, w) in enumerate(zip(g.operands, g.input_weights)):
                    if w == 0:
                        continue
                    bits = w * nblk * b
                    if op in keys:
                        payload = cts[idx] ^ self._prg(keys[op], bits, f"{g.id}:{j}")
                        chunks = [(payload >> (b * (w * nblk - 1 - c))) & ((1 << b) - 1)
                                  for c in range(w * nblk)]
                        for p in range(w):
                            points.append((x + p, chunks[p * nblk:(p + 1) * nblk]))
                    x += w
                    idx += 1
                if len(points) >= g.threshold:
                    k = 0
                    for blk in range(nblk):
                        poly = poly_interpolate(F, [(xx, vals[blk]) for xx, vals in points[: g.threshold]])
                        k |= poly.coefficient(0) << (blk * b)
                    keys[g.id] = k & ((1 << self.lam) - 1)
        if self.circuit.output not in keys:
            raise UnauthorizedError("wire keys do not chain to the output")
        return cts[-1] ^ self._prg(keys[self.circuit.output], self.secret_bits, "out")

    # ---- coalition hybrid ------------------------------------------------

    def derivable(self, P: Iterable[int]) -> set[str]:
        """Wires whose keys coalition P learns by forward chaining."""
        known = {f"x{i}" for i in P}
        for g in self.circuit.gates:
            have = sum(w for op, w in zip(g.operands, g.input_weights) if op in known)
            if have >= g.threshold:
                known.add(g.id)
        return known

    def hybrid(self, P: Iterable[int]) -> "YaoHybrid":
        return YaoHybrid(self, frozenset(P))


class YaoHybrid(ClassicalScheme):
    """View of coalition P with every PRG output on a non-derivable key made uniform.

    A ciphertext masked by such an output is an independent uniform string
    (each PRG call has its own domain tag), so it is marginalised out
    exactly by leaving it out of the view.  What remains is P's own keys and
    every ciphertext whose masks P can compute.
    """

    kind = "yao-hybrid"

    def __init__(self, yao: YaoScheme, P: frozenset[int]):
        self.yao = yao
        self.P = P
        self.structure = yao.structure
        self.secret_modulus = yao.secret_modulus
        self.known = yao.derivable(P)

    @property
    def tape_moduli(self):
        return self.yao.tape_moduli

    def _visible(self) -> list[tuple[int, set[str]]]:
        """(index into the real ciphertext list, wires it depends on) for visible ones."""
        out, idx = [], 0
        for g in self.yao.circuit.gates:
            if g.kind == "OR":
                for j, op in enumerate(g.operands):
                    if op in self.known:
                        out.append((idx, {op, g.id}))
                    idx += 1
            elif g.kind == "AND":
                if all(op in self.known for op in g.operands):
                    out.append((idx, set(g.operands) | {g.id}))
                idx += 1
            else:
                for j, (op, w) in enumerate(zip(g.operands, g.input_weights)):
                    if w == 0:
                        continue
                    if op in self.known:
                        out.append((idx, {op, g.id, f"coef:{g.id}"}))
                    idx += 1
        if self.yao.circuit.output in self.known:
            out.append((idx, {self.yao.circuit.output, "secret"}))
        return out

    def view(self, P, secret, tape_values):
        if frozenset(P) != self.P:
            raise SchemeError("hybrid is specific to its coalition")
        sv = self.yao.share_with(secret, tape_values)
        vis = [sv.public[i] for i, _ in self._visible()]
        own = [sv.shares[i][0] for i in sorted(P)]
        return tuple(own + vis)

    def view_batch(self, P, secret, tapes):
        if frozenset(P) != self.P:
            raise SchemeError("hybrid is specific to its coalition")
        if not self.yao._batchable:
            return super().view_batch(P, secret, tapes)
        pub = self.yao.public_batch(secret, tapes)
        cols = [tapes[:, self.yao._pos[f"k:x{i}"]] for i in sorted(P)] + [pub[i] for i, _ in self._visible()]
        if not cols:
            return np.zeros((len(tapes), 0), dtype=np.int64)
        return np.stack(cols, axis=1).astype(np.int64)

    def relevant_tape(self, P):
        wires = {f"x{i}" for i in P}
        for _, deps in self._visible():
            wires |= deps
        rel = []
        for name, pos in self.yao._pos.items():
            kind, rest = name.split(":", 1)
            if kind == "k" and rest in wires:
                rel.append(pos)
            elif kind == "c" and f"coef:{rest.split(':')[0]}" in wires:
                rel.append(pos)
        return sorted(rel)

    def share_with(self, secret, tape_values):
        return self.yao.share_with(secret, tape_values)

    def reconstruct(self, shares, public=()):
        return self.yao.reconstruct(shares, public)
