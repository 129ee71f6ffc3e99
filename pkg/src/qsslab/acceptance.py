"""The twelve end-to-end acceptance checks, each with its tolerance and time limit.

Every check returns a :class:`Result`; a check passes only if its numerical
conditions hold *and* it finished inside its time limit.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .access import (WeightFunction, analyze, canonical_msp, enumerate_monotone, from_mask,
                     heavy_lift, msp_accepts, stack_lifted_msp, threshold, tree_family, tree_witness)
from .compiler import embed, preset, verify_correctness, verify_privacy
from .gf import gf, rs_code
from .qecc import (codespace_projector, copies_required, css_build, kl_check, long_message_params,
                   min_message_length, multicopy_threshold, quantum_shamir)
from .qotp import OtpKey, key_average_check, otp_dec, otp_enc
from .qsim import (PureState, RegisterSystem, apply_channel, entangle_reference, partial_trace,
                   random_density, random_isometry, random_state, trace_distance)


@dataclass(frozen=True)
class Result:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    limit: float

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.number:2d} {self.name}: {self.detail} ({self.elapsed:.2f}s / {self.limit:g}s)"


def _unauthorized(f) -> list[list[int]]:
    return [list(from_mask(m)) for m in range(1, 1 << f.n) if not f.evaluate(from_mask(m))]


def _authorized(f) -> list[list[int]]:
    return [list(from_mask(m)) for m in range(1, 1 << f.n) if f.evaluate(from_mask(m))]


def _entanglement_fidelity(qc, P) -> float:
    d = qc.logical_dim
    st = qc.encode(entangle_reference(d, "ref", "s0"), ["s0"])
    out = qc.decode(st, P, "out")
    rho = partial_trace(out, ["ref", "out"]).matrix
    phi = np.eye(d).reshape(-1) / math.sqrt(d)
    return float(np.real(phi.conj() @ rho @ phi))


def _test_secrets(d: int) -> list[np.ndarray]:
    return [embed([1], d), embed([0, 1], d), embed([0, 0, 1], d), embed([1, 1], d), embed([1, 0, 1j], d)]


# --------------------------------------------------------------------------


def c01_qotp() -> tuple[bool, str]:
    rng = np.random.default_rng(1)
    avg_err, inv_err = 0.0, 0.0
    for d in (2, 3, 5):
        for _ in range(20):
            v = random_state((d,), rng).amplitudes
            avg_err = max(avg_err, key_average_check(d, np.outer(v, v.conj())))
            avg_err = max(avg_err, key_average_check(d, random_density(d, rng)))
        st = random_state((d, d), rng)
        for a, b in itertools.product(range(d), repeat=2):
            key = OtpKey(((a, b),), (d,))
            back = otp_dec(otp_enc(st, key, [0]), key, [0])
            inv_err = max(inv_err, float(np.max(np.abs(back.amplitudes - st.amplitudes))))
    ok = avg_err <= 1e-10 and inv_err <= 1e-12
    return ok, f"key-average deviation {avg_err:.1e}, Dec(Enc) error {inv_err:.1e}"


def c02_quantum_shamir() -> tuple[bool, str]:
    worst_fid, worst_diff = 1.0, 0.0
    for t, n, q in ((2, 3, 3), (3, 5, 5)):
        qc = quantum_shamir(t, n, q)
        for P in itertools.combinations(range(1, n + 1), t):
            worst_fid = min(worst_fid, _entanglement_fidelity(qc, P))
        for P in itertools.chain.from_iterable(itertools.combinations(range(1, n + 1), k) for k in range(1, t)):
            regs = [f"q{r}" for r, owner in enumerate(qc.owners) if owner in P]
            reds = []
            for v in _test_secrets(q):
                st = qc.encode(PureState(RegisterSystem(("s0",), (q,)), v), ["s0"])
                reds.append(partial_trace(st, regs).matrix)
            for a, b in itertools.combinations(reds, 2):
                worst_diff = max(worst_diff, float(np.max(np.abs(a - b))))
    ok = abs(worst_fid - 1) <= 1e-9 and worst_diff <= 1e-10
    return ok, f"min entanglement fidelity {worst_fid:.12f}, max unauthorized state difference {worst_diff:.1e}"


def c03_css() -> tuple[bool, str]:
    F = gf(3)
    qc = css_build(rs_code(F, 3, 2), rs_code(F, 3, 2))
    proj_err = float(np.max(np.abs(codespace_projector(qc) - codespace_projector(quantum_shamir(2, 3, 3)))))
    V, dims = qc.full_encoder(), qc.register_dims
    single = max(kl_check(V, dims, [r]) for r in range(3))
    double = min(kl_check(V, dims, list(e)) for e in itertools.combinations(range(3), 2))
    ok = qc.logical_dim == 3 and proj_err <= 1e-10 and single <= 1e-12 and double > 0.1
    return ok, (f"logical dim {qc.logical_dim}, projector difference {proj_err:.1e}, "
                f"single-erasure KL {single:.1e}, double-erasure KL {double:.3f}")


def c04_perfect_compiler() -> tuple[bool, str]:
    s = preset("perfect:minsets{{1,2,3},{2,3,4}}")
    unauth = _unauthorized(s.f)
    dist = max(verify_privacy(s, P, mode="exact").max_distance for P in unauth)
    fid = min(verify_correctness(s, P) for P in ([1, 2, 3], [2, 3, 4]))
    ok = len(unauth) == 12 and dist <= 1e-10 and abs(fid - 1) <= 1e-8
    return ok, f"{len(unauth)} unauthorized sets, max distance {dist:.1e}, min fidelity {fid:.10f}"


def c05_statistical_lifting() -> tuple[bool, str]:
    parts, ok = [], True
    for eps in ("0", "1/4", "1/2"):
        s = preset(f"leaky:minsets{{{{1,2}}}};n=3;eps={eps}")
        e = float(Fraction(eps))
        d = max(verify_privacy(s, P, mode="exact").max_distance for P in _unauthorized(s.f))
        fid = verify_correctness(s, [1, 2])
        ok &= e - 1e-9 <= d <= 2 * e + 1e-9 and abs(fid - 1) <= 1e-8
        parts.append(f"eps={e:g}: D={d:.6f}")
    return ok, ", ".join(parts)


def c06_hybrid() -> tuple[bool, str]:
    expr = "and(x1,th(2,x2,x3,x4))"
    s = preset(f"yao:{expr};lambda=3")
    unauth = _unauthorized(s.f)
    dist = max(verify_privacy(s, P, mode="exact", hybrid=True).max_distance for P in unauth)
    fid = 1.0
    for lam in (3, 16):
        real = preset(f"yao:{expr};lambda={lam}")
        fid = min(fid, min(verify_correctness(real, P) for P in _authorized(real.f)))
    ok = dist <= 1e-10 and abs(fid - 1) <= 1e-8
    return ok, f"hybrid max distance {dist:.1e} over {len(unauth)} sets, real-PRG min fidelity {fid:.10f}"


def c07_long_message() -> tuple[bool, str]:
    ok, notes = True, []
    for n, t in ((3, 2), (5, 3), (7, 4)):
        m0 = min_message_length(n, t)
        for m in range(m0, m0 + 50):
            p = long_message_params(n, t, m)
            ok &= p.rate_ok and p.distance_ok and p.ratio <= p.ratio_bound
        notes.append(f"m_min({n},{t})={m0}")
    p = long_message_params(3, 2, 12)
    row = (p.N, p.r, p.K) == (30, 5, 17) and abs(p.ratio - 4.1667) < 5e-5
    ok &= row
    notes.append(f"(3,2,12): N={p.N} r={p.r} K={p.K} ratio={p.ratio:.4f}")
    return ok, ", ".join(notes)


def c08_multicopy() -> tuple[bool, str]:
    qc = multicopy_threshold(2, 4, 5)
    layout = all(len(qc.party_registers(i)) == 1 and qc.register_dims[qc.party_registers(i)[0]] == 5
                 for i in range(1, 5))
    formula = all(copies_required(t, n) == max(1, n - 2 * t + 2)
                  for n in range(1, 11) for t in range(1, n + 1))
    s = preset("multicopy:th(2,4);ss=shamir")
    fid = min(verify_correctness(s, list(P), seeds=(0,)) for P in itertools.combinations(range(1, 5), 2))
    ok = qc.copies == 2 and layout and formula and abs(fid - 1) <= 1e-8
    return ok, f"copies {qc.copies}, one qudit per party {layout}, formula matches {formula}, min fidelity {fid:.10f}"


def c09_heavy_lift() -> tuple[bool, str]:
    n, F = 3, gf(2)
    funcs = enumerate_monotone(n)
    bad = []
    for f in funcs:
        lifted = heavy_lift(f)
        rep = analyze(lifted)
        problems = []
        if not rep.heavy:
            problems.append("lift not heavy")
        if not rep.no_cloning:
            problems.append("lift not no-cloning")
        mprime = canonical_msp(lifted, F)
        stacked = stack_lifted_msp(mprime, f)
        if any(msp_accepts(stacked, from_mask(m)) != f.evaluate(from_mask(m)) for m in range(1 << n)):
            problems.append("stacked program differs from f")
        if stacked.size > 2 * n * mprime.size:
            problems.append("stacked program too large")
        if problems:
            bad.append(f"minsets {[list(s) for s in f.minimal_sets()]}: " + "; ".join(problems))
    ok = len(funcs) == 20 and not bad
    detail = f"{len(funcs)} monotone functions, {len(bad)} failing"
    if bad:
        detail += " [" + " | ".join(bad) + "]"
    return ok, detail


def c10_tree_witness() -> tuple[bool, str]:
    n = 9
    f = tree_family(threshold(5, 9), n)
    rng = np.random.default_rng(10)
    ok = True
    for _ in range(100):
        w = WeightFunction(tuple(int(v) for v in rng.integers(1, 20, size=2 * n)))
        x = tree_witness(w, n)
        P = [i + 1 for i, b in enumerate(x) if b]
        ok &= f.evaluate(P) and 2 * sum(w.weights[i - 1] for i in P) < w.total
    uni = WeightFunction((1,) * (2 * n))
    xu = tree_witness(uni, n)
    wu = sum(xu)
    ok &= f.evaluate([i + 1 for i, b in enumerate(xu) if b]) and wu == 4 and uni.total / 2 == 9
    return ok, f"100 random weightings valid: {ok}, uniform witness weight {wu} vs W/2 = {uni.total / 2:g}"


def c11_trace_distance() -> tuple[bool, str]:
    rng = np.random.default_rng(11)
    tol = 1e-9
    worst = {k: -np.inf for k in ("i", "ii", "iii", "v", "vi")}
    for _ in range(200):
        d, dout = (int(v) for v in rng.integers(2, 9, size=2))
        de = -(-d // dout) * int(rng.integers(1, 3))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        V = random_isometry(d, dout * de, rng)
        worst["i"] = max(worst["i"], trace_distance(apply_channel(rho, V, dout), apply_channel(sigma, V, dout))
                         - trace_distance(rho, sigma))
    for _ in range(200):
        da, db = (int(v) for v in rng.integers(2, 5, size=2))
        r, s = random_density(da * db, rng), random_density(da * db, rng)
        ra = np.einsum("ajbj->ab", r.reshape(da, db, da, db))
        sa = np.einsum("ajbj->ab", s.reshape(da, db, da, db))
        worst["ii"] = max(worst["ii"], trace_distance(ra, sa) - trace_distance(r, s))
    for _ in range(200):
        d, k = int(rng.integers(2, 9)), int(rng.integers(2, 6))
        p, q = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
        rs = [random_density(d, rng) for _ in range(k)]
        ss = [random_density(d, rng) for _ in range(k)]
        lhs = trace_distance(sum(a * m for a, m in zip(p, rs)), sum(b * m for b, m in zip(q, ss)))
        rhs = 0.5 * np.abs(p - q).sum() + sum(a * trace_distance(x, y) for a, x, y in zip(p, rs, ss))
        worst["iii"] = max(worst["iii"], lhs - rhs)
    for _ in range(200):
        d, e = (int(v) for v in rng.integers(2, 5, size=2))
        rho, sigma, tau, nu = (random_density(x, rng) for x in (d, d, e, e))
        worst["v"] = max(worst["v"], abs(trace_distance(np.kron(rho, tau), np.kron(sigma, tau))
                                         - trace_distance(rho, sigma)))
        worst["vi"] = max(worst["vi"], trace_distance(np.kron(rho, tau), np.kron(sigma, nu))
                          - trace_distance(rho, sigma) - trace_distance(tau, nu))
    ok = all(v <= tol for v in worst.values())
    return ok, ", ".join(f"{k}: {v:+.1e}" for k, v in worst.items())


def c12_tree() -> tuple[bool, str]:
    s = preset("tree:th(2, x1, x2, th(2, x3, x4, x5))")
    auth = [[1, 3, 4], [3, 4, 5, 2]]
    fid = min(verify_correctness(s, P) for P in auth)
    unauth = _unauthorized(s.f)
    reports = [verify_privacy(s, P, mode="exact") for P in unauth]
    dist = max(r.max_distance for r in reports)
    exact = all(r.mode == "exact" for r in reports)
    ok = abs(fid - 1) <= 1e-8 and dist <= 1e-10 and exact
    return ok, f"min fidelity {fid:.10f}, max distance {dist:.1e} over {len(unauth)} sets, exhaustive {exact}"


CRITERIA: list[tuple[int, str, float, Callable[[], tuple[bool, str]]]] = [
    (1, "one-time pad privacy and inversion", 5, c01_qotp),
    (2, "quantum Shamir (2,3) and (3,5)", 30, c02_quantum_shamir),
    (3, "CSS builder on RS[3,2]", 10, c03_css),
    (4, "compiler, perfect formula scheme", 120, c04_perfect_compiler),
    (5, "statistical lifting eps -> 2 eps", 120, c05_statistical_lifting),
    (6, "wire-key hybrid privacy", 120, c06_hybrid),
    (7, "long-message parameters", 1, c07_long_message),
    (8, "multi-copy threshold", 300, c08_multicopy),
    (9, "heavy lift and stacked span programs", 30, c09_heavy_lift),
    (10, "tree witness", 10, c10_tree_witness),
    (11, "trace-distance invariants", 60, c11_trace_distance),
    (12, "tree composition", 300, c12_tree),
]


def run_criterion(number: int) -> Result:
    num, name, limit, fn = CRITERIA[number - 1]
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported with its message
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if elapsed > limit:
        ok = False
        detail += "; over time limit"
    return Result(num, name, bool(ok), detail, elapsed, limit)


def run_all(echo: Callable[[str], None] | None = print) -> list[Result]:
    results = []
    for num, *_ in CRITERIA:
        r = run_criterion(num)
        if echo is not None:
            echo(r.line())
        results.append(r)
    return results
