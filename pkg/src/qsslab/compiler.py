"""Quantum secret sharing from a classical scheme, a quantum one-time pad and a QECC.

Sharing a secret state: draw a pad key k, encrypt every copy of the secret
with its own Pauli pad, encode the copies with the QECC, and share k with the
classical scheme.  Reconstruction recovers k classically, decodes the
encrypted state from the held registers and removes the pad.

Presets (``preset(name)``):

* ``perfect:<f>`` - formula scheme (or ``ss=shamir`` for thresholds) plus the
  threshold code at the heaviness of f.
* ``yao:<f>`` - wire-key scheme plus the same code.
* ``leaky:<f>;eps=..`` - formula scheme that leaks with probability eps.
* ``longmsg:n,t,m`` - PRG-expanded key over a small stand-in code, with the
  parameter accounting for the real (n, t, m) code.
* ``multicopy:th(t,n)`` - multi-copy threshold code plus classical Shamir.
* ``weighted:<f>;w=..`` - weighted expansion of a threshold code.
* ``tree:<expr>`` - composed threshold codes down a tree.

``<f>`` is ``th(t,n)``, ``minsets{{1,2},{2,3}}``, a nested
``and/or/th/wth`` expression, or ``file:<path>`` in the structure grammar.
Options follow as ``;key=value``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .access import (AccessStructure, MonotoneCircuit, WeightFunction, analyze, as_circuit,
                     parse_expr, parse_structure, threshold, weighted_threshold)
from .classical import (ClassicalScheme, FormulaScheme, LeakyScheme, SchemeError, ShamirScheme,
                        ShareVector, Tape, UnauthorizedError, YaoScheme, decode_bytes, row_codes,
                        view_counts, prg_bits, EXACT_TAPE_CAP)
from .gf import gf, next_prime, rs_code
from .qecc import (CodeError, QECCScheme, copies_required, css_build, long_message_params,
                   multicopy_threshold, quantum_shamir, tree_qecc, weighted_expand)
from .qotp import OtpKey, enc_operator, key_bits, key_space, otp_dec, otp_enc
from .qsim import PureState, RegisterSystem, entangle_reference, partial_trace, state_from

DEAL_VERSION = 1
# Trace distances below this are floating-point residue of exact zeros and
# are reported as 0.0.  Every privacy tolerance in use is far above it.
NOISE_FLOOR = 1e-13


class PresetError(ValueError):
    pass


@dataclass(eq=False)
class QSSScheme:
    name: str
    f: AccessStructure
    ss: ClassicalScheme
    qc: QECCScheme
    mode: str
    seed_bits: int = 0
    prg_backend: str = "shake128"
    ss_builder: Callable[[int], ClassicalScheme] | None = None
    long_message: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.f.n != self.qc.n:
            raise PresetError("structure and code disagree on the number of parties")
        if self.f.n <= 12 and not self.qc.realized().dominates(self.f):
            raise PresetError("code does not cover every authorized set of f")
        if self.qc.copies == 1 and self.f.n <= 20 and not analyze(self.f).no_cloning:
            raise PresetError("f is not no-cloning: a set and its complement would both hold the secret")
        if self.classical_secrets > self.ss.secret_modulus:
            raise PresetError("classical scheme cannot hold the key")

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def secret_dim(self) -> int:
        return self.qc.logical_dim

    @property
    def copies(self) -> int:
        return self.qc.copies

    @property
    def key_dims(self) -> tuple[int, ...]:
        return (self.secret_dim,) * self.copies

    @property
    def key_count(self) -> int:
        return key_space(self.key_dims)

    @property
    def classical_secrets(self) -> int:
        """Number of values the classical scheme must be able to share."""
        return 1 << self.seed_bits if self.mode == "long-message" else self.key_count

    def key_of(self, classical_secret: int) -> int:
        if self.mode == "long-message":
            return prg_bits(classical_secret, self.seed_bits, 64 + self.key_count.bit_length(),
                            self.prg_backend, "pad-key") % self.key_count
        return classical_secret

    @property
    def tape_moduli(self) -> tuple[int, ...]:
        return (self.classical_secrets,) + self.ss.tape_moduli

    @property
    def share_moduli(self) -> dict[int, tuple[int, ...]]:
        return self.ss.share_with(0, [0] * len(self.ss.tape_moduli)).moduli

    @property
    def public_moduli(self) -> tuple[int, ...]:
        return self.ss.share_with(0, [0] * len(self.ss.tape_moduli)).public_moduli


@dataclass(eq=False)
class Deal:
    scheme: str
    state: PureState
    party_map: dict[int, list[int]]
    environment: list[int]
    shares: ShareVector
    tape: Tape
    payload_labels: list[str] = field(default_factory=list)

    def classical_hex(self) -> dict[int, str]:
        return {i: self.shares.party_bytes(i).hex() for i in sorted(self.shares.shares)}

    def to_json(self) -> str:
        amps = [[float(a.real), float(a.imag)] for a in self.state.amplitudes]
        obj = {
            "version": DEAL_VERSION,
            "scheme": self.scheme,
            "labels": list(self.state.system.labels),
            "dims": list(self.state.dims),
            "amplitudes": amps,
            "party_map": {str(i): v for i, v in sorted(self.party_map.items())},
            "environment": self.environment,
            "classical": {str(i): h for i, h in self.classical_hex().items()},
            "public": self.shares.public_bytes().hex(),
            "tape": self.tape.to_json(),
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, scheme: QSSScheme) -> "Deal":
        obj = json.loads(text)
        if obj.get("version") != DEAL_VERSION:
            raise PresetError("unsupported deal version")
        if obj["scheme"] != scheme.name:
            raise PresetError(f"deal was made with {obj['scheme']!r}, not {scheme.name!r}")
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        state = PureState(RegisterSystem(tuple(obj["labels"]), tuple(obj["dims"])), amps)
        moduli = scheme.share_moduli
        shares = {int(i): decode_bytes(bytes.fromhex(h), moduli[int(i)]) for i, h in obj["classical"].items()}
        pm = scheme.public_moduli
        public = decode_bytes(bytes.fromhex(obj["public"]), pm) if pm else ()
        sv = ShareVector(shares, {i: moduli[i] for i in shares}, public, pm)
        return cls(obj["scheme"], state, {int(i): v for i, v in obj["party_map"].items()},
                   list(obj["environment"]), sv, Tape.from_json(obj["tape"]))


# --------------------------------------------------------------------------
# share / reconstruct


def prepare_secret(amplitudes: Sequence[complex], copies: int = 1) -> PureState:
    """Copies of the secret on registers s0, s1, ..."""
    a = np.asarray(amplitudes, complex)
    a = a / np.linalg.norm(a)
    d = a.size
    st = PureState(RegisterSystem(("s0",), (d,)), a)
    for c in range(1, copies):
        st = st @ PureState(RegisterSystem((f"s{c}",), (d,)), a)
    return st


def embed(amplitudes: Sequence[complex], d: int) -> np.ndarray:
    """Pad a low-dimensional secret into the first levels of dimension d."""
    a = np.zeros(d, complex)
    v = np.asarray(amplitudes, complex)
    if v.size > d:
        raise PresetError(f"secret of dimension {v.size} does not fit in {d}")
    a[: v.size] = v
    return a / np.linalg.norm(a)


def qss_share(scheme: QSSScheme, state: PureState, tape: Tape,
              payloads: Sequence[str] | None = None) -> Deal:
    """Pad, encode and share; ``payloads`` name the secret registers (one per copy)."""
    payloads = [f"s{c}" for c in range(scheme.copies)] if payloads is None else list(payloads)
    if len(payloads) != scheme.copies:
        raise PresetError(f"scheme needs {scheme.copies} copies of the secret")
    for lab in payloads:
        if state.dims[state.system.index(lab)] != scheme.secret_dim:
            raise PresetError(f"secret register {lab} must have dimension {scheme.secret_dim}")
    values = tape.draw(scheme.tape_moduli)
    cs = values[0]
    key = OtpKey.from_int(scheme.key_of(cs), scheme.key_dims)
    enc = otp_enc(state, key, payloads)
    encoded = scheme.qc.encode(enc, payloads)
    shares = scheme.ss.share_with(cs, values[1:])
    labels = encoded.system.labels
    party_map: dict[int, list[int]] = {i: [] for i in range(1, scheme.n + 1)}
    env = []
    for r, owner in enumerate(scheme.qc.owners):
        idx = labels.index(f"q{r}")
        if owner is None:
            env.append(idx)
        else:
            party_map[owner].append(idx)
    return Deal(scheme.name, encoded, party_map, env, shares, tape, payloads)


def qss_reconstruct(scheme: QSSScheme, deal: Deal, P: Sequence[int], witness=None,
                    out_label: str = "out") -> PureState:
    """Recover the secret into register ``out_label``.

    ``witness`` is accepted for structures whose authorization needs one;
    no shipped structure uses it.
    """
    P = sorted(set(P))
    shares = {i: deal.shares.shares[i] for i in P}
    cs = scheme.ss.reconstruct(shares, deal.shares.public)
    if cs >= scheme.classical_secrets:
        raise SchemeError("classical reconstruction returned an out-of-range key")
    key = OtpKey.from_int(scheme.key_of(cs), scheme.key_dims)
    if not scheme.qc.realized().evaluate(P):
        raise UnauthorizedError("parties cannot decode the quantum shares")
    branch, _ = scheme.qc.decoder(P)
    decoded = scheme.qc.decode(deal.state, P, out_label)
    pair = OtpKey((key.pairs[branch],), (scheme.secret_dim,))
    return otp_dec(decoded, pair, [out_label])


# --------------------------------------------------------------------------
# verification


def spanning_family(d: int) -> list[np.ndarray]:
    """|i>, (|i>+|j>)/sqrt2, (|i>+i|j>)/sqrt2: spans all d x d operators."""
    fam = []
    for i in range(d):
        v = np.zeros(d, complex)
        v[i] = 1
        fam.append(v)
    for i, j in itertools.combinations(range(d), 2):
        for ph in (1, 1j):
            v = np.zeros(d, complex)
            v[i], v[j] = 1 / math.sqrt(2), ph / math.sqrt(2)
            fam.append(v)
    return fam


def verify_correctness(scheme: QSSScheme, P: Sequence[int], seeds: Sequence[int] = (0, 1, 2)) -> float:
    """Worst fidelity of the reconstructed secret over a few tapes.

    Single-copy schemes use entanglement fidelity with an untouched reference.
    Multi-copy schemes cannot share half of an entangled pair several times,
    so they report the minimum pure-state fidelity over a spanning family.
    """
    if not scheme.f.evaluate(P):
        raise UnauthorizedError(f"{sorted(P)} is not authorized")
    d = scheme.secret_dim
    worst = 1.0
    for seed in seeds:
        tape = Tape(seed=seed)
        if scheme.copies == 1:
            st = entangle_reference(d, "ref", "s0")
            deal = qss_share(scheme, st, tape, ["s0"])
            out = qss_reconstruct(scheme, deal, P)
            rho = partial_trace(out, ["ref", "out"]).matrix
            phi = np.eye(d).reshape(-1) / math.sqrt(d)
            worst = min(worst, float(np.real(phi.conj() @ rho @ phi)))
        else:
            for v in spanning_family(d):
                deal = qss_share(scheme, prepare_secret(v, scheme.copies), tape)
                out = qss_reconstruct(scheme, deal, P)
                rho = partial_trace(out, ["out"]).matrix
                worst = min(worst, float(np.real(v.conj() @ rho @ v)))
    return worst


@dataclass(frozen=True)
class PrivacyReport:
    max_distance: float
    mode: str
    tapes: int
    patterns: int
    pairs: int
    samples: int = 0
    radius: float = 0.0


def _pad_unitaries(scheme: QSSScheme) -> np.ndarray:
    d, c = scheme.secret_dim, scheme.copies
    single = np.stack([enc_operator(d, a, b) for a in range(d) for b in range(d)])
    out = single
    for _ in range(1, c):
        out = np.einsum("kij,lmn->klimjn", out, single).reshape(
            out.shape[0] * single.shape[0], out.shape[1] * d, out.shape[2] * d)
    return out


def _sampled_counts(ss: ClassicalScheme, P, secrets, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    moduli = ss.tape_moduli
    rel = ss.relevant_tape(P)
    grid = np.zeros((samples, len(moduli)), dtype=np.int64)
    for p in rel:
        grid[:, p] = rng.integers(0, moduli[p], size=samples)
    views = [ss.view_batch(P, s, grid) for s in secrets]
    allv = np.concatenate(views, axis=0)
    inv, nviews = row_codes(allv)
    counts = np.zeros((nviews, len(secrets)), dtype=np.int64)
    np.add.at(counts, (inv, np.repeat(np.arange(len(secrets)), samples)), 1)
    return counts, samples


def verify_privacy(scheme: QSSScheme, P: Sequence[int], family: Sequence[np.ndarray] | None = None,
                   mode: str = "exact", hybrid: bool = False, samples: int = 4096, seed: int = 0,
                   cap: int = EXACT_TAPE_CAP) -> PrivacyReport:
    """Largest trace distance between the coalition's states for two secrets.

    The coalition state is (classical view) x (its quantum registers).  For
    every distinct likelihood pattern over pad keys the quantum part is the
    key-weighted mixture pushed through the encoder and traced down to P.
    ``hybrid`` replaces a wire-key scheme by its uniform-key coalition hybrid.
    Exact mode enumerates every relevant tape; it falls back to sampling
    above ``cap`` (tape, secret) pairs.
    """
    P = sorted(set(P))
    if scheme.f.evaluate(P):
        raise PresetError(f"{P} is authorized")
    ss = scheme.ss.hybrid(P) if hybrid else scheme.ss
    secrets = list(range(scheme.classical_secrets))
    used_mode, radius, nsamp = mode, 0.0, 0
    if mode == "exact":
        try:
            vc = view_counts(ss, P, secrets, cap)
            counts, per_secret = vc.counts, vc.tapes
        except SchemeError:
            used_mode = "statistical"
    if used_mode == "statistical":
        counts, per_secret = _sampled_counts(ss, P, secrets, samples, seed)
        nsamp = samples
        radius = math.sqrt(counts.shape[0] / samples)
    patterns, mult = np.unique(counts, axis=0, return_counts=True)
    keys = np.array([scheme.key_of(s) for s in secrets])
    U = _pad_unitaries(scheme)
    # coalition registers
    regs = [r for r, o in enumerate(scheme.qc.owners) if o in P]
    V = scheme.qc.full_encoder()
    dims = scheme.qc.register_dims
    din = V.shape[1]
    rest = [r for r in range(len(dims)) if r not in regs]
    T = V.reshape(tuple(dims) + (din,))
    T = np.transpose(T, regs + rest + [len(dims)])
    dP = int(np.prod([dims[r] for r in regs])) if regs else 1
    T = T.reshape(dP, -1, din)
    fam = spanning_family(scheme.secret_dim) if family is None else [np.asarray(v, complex) for v in family]
    rhos = []
    for v in fam:
        vv = v
        for _ in range(1, scheme.copies):
            vv = np.kron(vv, v)
        rhos.append(np.outer(vv, vv.conj()))
    norm = len(secrets) * per_secret
    reduced = []  # reduced[L][family index]
    for pat in patterns:
        w = np.zeros(U.shape[0])
        np.add.at(w, keys, pat / norm)
        nz = np.flatnonzero(w)
        Uw = U[nz]
        row = []
        for rho in rhos:
            M = np.einsum("k,kij,jl,kml->im", w[nz], Uw, rho, Uw.conj(), optimize=True)
            row.append(np.einsum("pei,ij,qej->pq", T, M, T.conj(), optimize=True))
        reduced.append(row)
    best = 0.0
    pairs = 0
    for a, b in itertools.combinations(range(len(fam)), 2):
        total = 0.0
        for L, m in enumerate(mult):
            diff = reduced[L][a] - reduced[L][b]
            total += m * 0.5 * float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())
        best = max(best, total)
        pairs += 1
    if best < NOISE_FLOOR:
        best = 0.0
    return PrivacyReport(float(best), used_mode, int(per_secret), len(patterns), pairs, nsamp, radius)


# --------------------------------------------------------------------------
# size accounting


@dataclass(frozen=True)
class SizeReport:
    quantum_bits: dict[int, float]
    classical_bits: dict[int, int]
    public_bits: int
    classical_total: int
    quantum_total: float
    counted_total: float
    formula_total: float | None
    secret_qubits: float
    information_ratio: float
    long_message: dict | None = None


def size_report(scheme: QSSScheme) -> SizeReport:
    """Share sizes counted directly, plus the compiler's size formula.

    The formula value is size(QC) + (pad key bits) * size(SS for one bit),
    i.e. the convention where the classical scheme is run once per key bit.
    """
    sv = scheme.ss.share_with(0, [0] * len(scheme.ss.tape_moduli))
    qbits = {i: sum(math.log2(scheme.qc.register_dims[r]) for r in scheme.qc.party_registers(i))
             for i in range(1, scheme.n + 1)}
    cbits = {i: sv.share_bits(i) for i in range(1, scheme.n + 1)}
    pub = sum(max(1, (m - 1).bit_length()) for m in sv.public_moduli)
    ctot = sum(cbits.values())
    qtot = sum(qbits.values())
    formula = None
    if scheme.ss_builder is not None:
        per_bit = scheme.ss_builder(2).size()
        formula = qtot + key_bits(scheme.key_dims) * per_bit
    secret_qubits = math.log2(scheme.secret_dim)
    ratio = max(qbits[i] + cbits[i] for i in qbits) / secret_qubits
    lm = None
    if scheme.long_message is not None:
        n, t, m = scheme.long_message
        p = long_message_params(n, t, m)
        lm = {"N": p.N, "r": p.r, "K": p.K, "c": p.c, "ok": p.ok, "ratio": p.ratio,
              "bound": p.ratio_bound}
    return SizeReport(qbits, cbits, pub, ctot, qtot, qtot + ctot, formula, secret_qubits, ratio, lm)


# --------------------------------------------------------------------------
# presets


def _split_options(text: str) -> tuple[str, dict[str, str]]:
    depth, parts, cur = 0, [], ""
    for ch in text:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == ";" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    opts = {}
    for p in parts[1:]:
        if "=" not in p:
            raise PresetError(f"option {p!r} is not key=value")
        k, v = p.split("=", 1)
        opts[k.strip()] = v.strip()
    return parts[0].strip(), opts


def _structure(expr: str, n: int | None) -> tuple[AccessStructure, WeightFunction | None]:
    if expr.startswith("file:"):
        with open(expr[5:], encoding="utf-8") as fh:
            parsed = parse_structure(fh.read())
        return parsed.structure, parsed.weights
    return parse_expr(expr, n), None


def _heavy_code(f: AccessStructure, q: int | None) -> QECCScheme:
    rep = analyze(f)
    if not rep.no_cloning:
        raise PresetError("f is not no-cloning (some set and its complement are both authorized); "
                          "a single copy of a quantum secret cannot be shared this way")
    if rep.heaviness is None:
        raise PresetError("f authorizes nothing")
    t, n = rep.heaviness, f.n
    if not 2 * t > n:
        raise PresetError(f"f is only {t}-heavy on {n} parties; the threshold code needs t > n/2")
    q = next_prime(max(n, 2 * t - 1)) if q is None else q
    return quantum_shamir(t, n, q)


def _classical(kind: str, f: AccessStructure, modulus: int, opts: dict) -> ClassicalScheme:
    if kind == "formula":
        return FormulaScheme(f, modulus)
    if kind == "shamir":
        rep = analyze(f)
        t = rep.heaviness
        if t is None or not threshold(t, f.n).equivalent(f):
            raise PresetError("Shamir realizes only threshold structures")
        return ShamirScheme.for_modulus(t, f.n, modulus)
    if kind == "yao":
        return YaoScheme(as_circuit(f), int(opts.get("lambda", 16)), modulus, opts.get("prg", "shake128"))
    if kind == "leaky":
        return LeakyScheme(f, modulus, Fraction(opts.get("eps", "0")))
    raise PresetError(f"unknown classical scheme {kind!r}")


def preset(name: str) -> QSSScheme:
    if ":" not in name:
        raise PresetError("preset names look like kind:arguments")
    kind, rest = name.split(":", 1)
    body, opts = _split_options(rest)
    n_opt = int(opts["n"]) if "n" in opts else None
    q_opt = int(opts["q"]) if "q" in opts else None
    try:
        if kind in ("perfect", "yao", "leaky"):
            f, _ = _structure(body, n_opt)
            qc = _heavy_code(f, q_opt)
            default = {"perfect": "formula", "yao": "yao", "leaky": "leaky"}[kind]
            ss_kind = opts.get("ss", default)
            mode = {"formula": "perfect", "shamir": "perfect", "yao": "computational",
                    "leaky": "statistical"}[ss_kind]
            K = key_space((qc.logical_dim,) * qc.copies)
            builder = lambda M, f=f, ss_kind=ss_kind: _classical(ss_kind, f, M, opts)
            return QSSScheme(name, f, builder(K), qc, mode, ss_builder=builder)
        if kind == "multicopy":
            f, _ = _structure(body, n_opt)
            rep = analyze(f)
            t, n = rep.heaviness, f.n
            if t is None or not threshold(t, n).equivalent(f):
                raise PresetError("multicopy presets take a threshold structure th(t,n)")
            q = next_prime(n + 1) if q_opt is None else q_opt
            qc = multicopy_threshold(t, n, q)
            K = key_space((q,) * qc.copies)
            ss_kind = opts.get("ss", "shamir")
            builder = lambda M: _classical(ss_kind, f, M, opts)
            return QSSScheme(name, f, builder(K), qc, "perfect", ss_builder=builder)
        if kind == "weighted":
            if "w" not in opts:
                raise PresetError("weighted presets need ;w=w1,w2,..")
            w = WeightFunction(tuple(int(x) for x in opts["w"].split(",")))
            t = int(opts.get("t", w.majority))
            if not 2 * t > w.total:
                raise PresetError("weighted threshold must exceed half the total weight")
            f = weighted_threshold(w.weights, t) if body in ("", "auto") else _structure(body, w.n)[0]
            rep = analyze(f, w, t)
            if not rep.weighted_heavy:
                raise PresetError(f"f is not weighted-heavy for w at threshold {t}")
            q = next_prime(max(w.total, 2 * t - 1)) if q_opt is None else q_opt
            qc = weighted_expand(quantum_shamir(t, w.total, q), w)
            K = key_space((q,))
            ss_kind = opts.get("ss", "yao")
            builder = lambda M: _classical(ss_kind, f, M, opts)
            mode = "computational" if ss_kind == "yao" else "perfect"
            return QSSScheme(name, f, builder(K), qc, mode, ss_builder=builder)
        if kind == "tree":
            f = _structure(body, n_opt)[0]
            if not isinstance(f, MonotoneCircuit):
                raise PresetError("tree presets need a gate expression")
            if q_opt is None:
                need = max(max(sum(g.input_weights), 2 * g.threshold - 1) for g in f.gates)
                q_opt = next_prime(max(2, need))
            qc = tree_qecc(f, q_opt)
            K = key_space((q_opt,))
            ss_kind = opts.get("ss", "formula")
            builder = lambda M: _classical(ss_kind, f, M, opts)
            mode = "computational" if ss_kind == "yao" else "perfect"
            return QSSScheme(name, f, builder(K), qc, mode, ss_builder=builder)
        if kind == "longmsg":
            n, t, m = (int(x) for x in body.split(","))
            f = threshold(t, n)
            q = next_prime(max(n, 2 * t - 1))
            if q == 2 * t - 1 == n:
                F = gf(q)
                qc = css_build(rs_code(F, q, t), rs_code(F, q, t))
            else:
                qc = quantum_shamir(t, n, q)
            seed_bits = int(opts.get("seed_bits", 8))
            builder = lambda M: ShamirScheme.for_modulus(t, n, M)
            return QSSScheme(name, f, builder(1 << seed_bits), qc, "long-message", seed_bits=seed_bits,
                             prg_backend=opts.get("prg", "shake128"), ss_builder=builder,
                             long_message=(n, t, m))
    except (CodeError, SchemeError, ValueError) as exc:
        if isinstance(exc, PresetError):
            raise
        raise PresetError(str(exc)) from exc
    raise PresetError(f"unknown preset kind {kind!r}")
