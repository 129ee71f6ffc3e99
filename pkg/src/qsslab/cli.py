"""Command-line front end.

    qss structure analyze FILE|EXPR [--weights w1,..] [--threshold t]
    qss params long-message --n 3 --t 2 --m 12 [--sweep K]
    qss share --preset NAME --secret basis:1 --out deal.json
    qss reconstruct --preset NAME --deal deal.json --parties 1,2 [--secret ...]
    qss verify privacy --preset NAME --parties 1 [--exact | --samples N] [--hybrid]
    qss verify correctness --preset NAME --parties 1,2
    qss report --preset NAME
    qss selftest

Exit status: 0 on success, 1 when a verification fails, 2 on usage or I/O
errors.  Reports are ``key=value`` or ``key: value`` lines.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import acceptance
from .access import AccessError, WeightFunction, analyze, parse_expr, parse_structure
from .classical import SchemeError, Tape, UnauthorizedError
from .compiler import (Deal, PresetError, embed, prepare_secret, preset, qss_reconstruct, qss_share,
                       size_report, verify_correctness, verify_privacy)
from .qecc import CodeError, long_message_params
from .qsim import SimError, partial_trace


class UsageError(Exception):
    pass


def fmt_sci(x: float) -> str:
    """Compact scientific notation: 0.0e0, 2.5e-1, 1.2e-16."""
    mant, exp = f"{x:.1e}".split("e")
    return f"{mant}e{int(exp)}"


def yes(b: bool) -> str:
    return "yes" if b else "no"


def parse_parties(text: str) -> list[int]:
    try:
        parties = sorted({int(p) for p in text.split(",") if p.strip()})
    except ValueError:
        raise UsageError(f"--parties takes comma-separated integers, got {text!r}") from None
    if not parties:
        raise UsageError("--parties is empty")
    return parties


def parse_secret(text: str, d: int) -> np.ndarray:
    if text.startswith("basis:"):
        i = int(text[6:])
        if not 0 <= i < d:
            raise UsageError(f"basis index {i} outside dimension {d}")
        v = np.zeros(d, complex)
        v[i] = 1
        return v
    try:
        amps = [complex(a.strip().replace("i", "j")) for a in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse secret amplitudes {text!r}") from None
    if not np.any(amps):
        raise UsageError("secret amplitudes are all zero")
    try:
        return embed(amps, d)
    except PresetError as exc:
        raise UsageError(str(exc)) from None


def read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# verbs


def cmd_structure(args) -> int:
    source = args.structure or args.source
    if source is None:
        raise UsageError("give a structure file or expression")
    weights = None
    try:
        with open(source, encoding="utf-8") as fh:
            parsed = parse_structure(fh.read())
        f, weights = parsed.structure, parsed.weights
    except FileNotFoundError:
        f = parse_expr(source)
    except OSError as exc:
        raise UsageError(f"{source}: {exc.strerror}") from None
    if args.weights:
        weights = WeightFunction(tuple(int(x) for x in args.weights.split(",")))
    rep = analyze(f, weights, args.threshold)
    print(f"monotone: {yes(rep.monotone)}")
    print(f"no-cloning: {yes(rep.no_cloning)}")
    heavy = f"yes (t={rep.heaviness})" if rep.heavy else "no" + (
        f" (t={rep.heaviness})" if rep.heaviness is not None else "")
    print(f"heavy: {heavy}")
    if rep.weighted_heavy is not None:
        print(f"weighted-heavy: {yes(rep.weighted_heavy)} (threshold={rep.weight_threshold}, "
              f"min authorized weight={rep.min_weight})")
    print(f"parties: {rep.n}")
    print("minimal sets:")
    for s in rep.minimal_sets:
        print("  {" + ",".join(map(str, s)) + "}")
    return 0


def _param_line(p) -> str:
    return f"N={p.N} r={p.r} K={p.K} ok={str(p.ok).lower()} ratio={p.ratio:.4f}"


def cmd_params(args) -> int:
    if None in (args.n, args.t, args.m):
        raise UsageError("params needs --n, --t and --m")
    if not 2 * args.t > args.n or args.t > args.n:
        raise UsageError("need n/2 < t <= n")
    if args.sweep is None:
        p = long_message_params(args.n, args.t, args.m)
        print(_param_line(p))
        return 0 if p.ok else 1
    print(f"{'m':>6} {'N':>6} {'r':>3} {'K':>6} {'ok':>5} {'ratio':>8} {'bound':>8}")
    all_ok = True
    for m in range(args.m, args.m + args.sweep):
        p = long_message_params(args.n, args.t, m)
        all_ok &= p.ok and p.ratio <= p.ratio_bound
        print(f"{m:>6} {p.N:>6} {p.r:>3} {p.K:>6} {str(p.ok).lower():>5} {p.ratio:>8.4f} {p.ratio_bound:>8.4f}")
    return 0 if all_ok else 1


def _scheme(args):
    if not args.preset:
        raise UsageError("--preset is required")
    s = preset(args.preset)
    if args.copies is not None and args.copies != s.copies:
        raise UsageError(f"preset {args.preset} uses {s.copies} copies, not {args.copies}")
    return s


def cmd_share(args) -> int:
    s = _scheme(args)
    if not args.secret:
        raise UsageError("--secret is required")
    v = parse_secret(args.secret, s.secret_dim)
    deal = qss_share(s, prepare_secret(v, s.copies), Tape(seed=args.seed))
    text = deal.to_json()
    if args.out:
        write_text(args.out, text)
        print(f"deal: {args.out}")
    else:
        print(text)
    print(f"registers: {len(deal.state.dims)}")
    print(f"amplitudes: {deal.state.amplitudes.size}")
    for i, regs in sorted(deal.party_map.items()):
        print(f"party {i}: registers {regs} classical {deal.classical_hex()[i]}")
    return 0


def cmd_reconstruct(args) -> int:
    s = _scheme(args)
    if not args.deal or not args.parties:
        raise UsageError("reconstruct needs --deal and --parties")
    deal = Deal.from_json(read_text(args.deal), s)
    P = parse_parties(args.parties)
    out = qss_reconstruct(s, deal, P)
    rho = partial_trace(out, ["out"]).matrix
    w, vecs = np.linalg.eigh(rho)
    top = vecs[:, -1]
    nz = np.flatnonzero(np.abs(top) > 1e-12)
    top = np.round(top * np.exp(-1j * np.angle(top[nz[0]])), 6) + 0.0
    print(f"parties={','.join(map(str, P))}")
    print(f"purity={float(np.real(np.trace(rho @ rho))):.10f}")
    print("state=" + ",".join(f"{c.real:.6f}{c.imag:+.6f}i" for c in top))
    if args.secret:
        v = parse_secret(args.secret, s.secret_dim)
        fid = float(np.real(v.conj() @ rho @ v))
        verdict = "PASS" if abs(1 - fid) <= args.tolerance else "FAIL"
        print(f"fidelity={fid:.10f} tolerance={fmt_sci(args.tolerance)} {verdict}")
        return 0 if verdict == "PASS" else 1
    return 0


def cmd_verify(args) -> int:
    s = _scheme(args)
    if not args.parties:
        raise UsageError("--parties is required")
    P = parse_parties(args.parties)
    if args.what == "privacy":
        mode = "statistical" if args.samples else "exact"
        rep = verify_privacy(s, P, mode=mode, hybrid=args.hybrid, samples=args.samples or 4096,
                             seed=args.seed)
        verdict = "PASS" if rep.max_distance <= args.tolerance + rep.radius * (rep.mode == "statistical") \
            else "FAIL"
        print(f"max_trace_distance={fmt_sci(rep.max_distance)} {verdict}")
        print(f"mode={rep.mode} tapes={rep.tapes} patterns={rep.patterns} secret_pairs={rep.pairs} "
              f"tolerance={fmt_sci(args.tolerance)}")
        if rep.mode == "statistical":
            print(f"samples={rep.samples} radius={fmt_sci(rep.radius)}")
    else:
        fid = verify_correctness(s, P, seeds=(args.seed,))
        verdict = "PASS" if abs(1 - fid) <= args.tolerance else "FAIL"
        print(f"min_fidelity={fid:.10f} {verdict}")
        print(f"tolerance={fmt_sci(args.tolerance)}")
    return 0 if verdict == "PASS" else 1


def cmd_report(args) -> int:
    s = _scheme(args)
    r = size_report(s)
    print(f"scheme={s.name}")
    print(f"mode={s.mode} parties={s.n} secret_dim={s.secret_dim} copies={s.copies} key_values={s.key_count}")
    print(f"quantum_bits={r.quantum_total:g} classical_bits={r.classical_total} public_bits={r.public_bits}")
    print(f"counted_total={r.counted_total:g}")
    if r.formula_total is not None:
        print(f"formula_total={r.formula_total:g}")
    print(f"information_ratio={r.information_ratio:.4f}")
    if r.long_message:
        lm = r.long_message
        print(f"long_message N={lm['N']} r={lm['r']} K={lm['K']} ok={str(lm['ok']).lower()} "
              f"ratio={lm['ratio']:.4f} bound={lm['bound']:.4f}")
    print(f"{'party':>5} {'qubits':>8} {'classical':>10}")
    for i in range(1, s.n + 1):
        print(f"{i:>5} {r.quantum_bits[i]:>8.3f} {r.classical_bits[i]:>10}")
    return 0


def cmd_selftest(args) -> int:
    results = acceptance.run_all(print)
    failed = [r.number for r in results if not r.passed]
    print(f"passed={len(results) - len(failed)} failed={len(failed)}")
    return 1 if failed else 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (u64)")
    common.add_argument("--preset")
    common.add_argument("--structure")
    common.add_argument("--secret")
    common.add_argument("--copies", type=int)
    common.add_argument("--parties")
    common.add_argument("--out")
    common.add_argument("--deal")
    common.add_argument("--tolerance", type=float, default=1e-9)
    mx = common.add_mutually_exclusive_group()
    mx.add_argument("--exact", action="store_true")
    mx.add_argument("--samples", type=int)

    ap = argparse.ArgumentParser(prog="qss", description="Quantum secret sharing lab", parents=[common])
    sub = ap.add_subparsers(dest="verb", required=True)

    st = sub.add_parser("structure", parents=[common], help="analyze an access structure")
    st.add_argument("action", choices=["analyze"])
    st.add_argument("source", nargs="?")
    st.add_argument("--weights")
    st.add_argument("--threshold", type=int)
    st.set_defaults(func=cmd_structure)

    pa = sub.add_parser("params", parents=[common], help="long-message code parameters")
    pa.add_argument("which", choices=["long-message", "lemma3"])
    pa.add_argument("--n", type=int)
    pa.add_argument("--t", type=int)
    pa.add_argument("--m", type=int)
    pa.add_argument("--sweep", type=int)
    pa.set_defaults(func=cmd_params)

    sh = sub.add_parser("share", parents=[common], help="deal a secret")
    sh.set_defaults(func=cmd_share)
    rc = sub.add_parser("reconstruct", parents=[common], help="reconstruct from a deal")
    rc.set_defaults(func=cmd_reconstruct)
    ve = sub.add_parser("verify", parents=[common], help="check privacy or correctness")
    ve.add_argument("what", choices=["privacy", "correctness"])
    ve.add_argument("--hybrid", action="store_true", help="use the uniform-key coalition hybrid")
    ve.set_defaults(func=cmd_verify)
    rp = sub.add_parser("report", parents=[common], help="share-size report")
    rp.set_defaults(func=cmd_report)
    se = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    se.set_defaults(func=cmd_selftest)
    return ap


def run(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.seed < 0 or args.seed >= 1 << 64:
        ap.error("--seed must be an unsigned 64-bit integer")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qss: error: {exc}", file=sys.stderr)
        return 2
    except UnauthorizedError as exc:
        print(f"qss: unauthorized: {exc}", file=sys.stderr)
        return 1
    except (PresetError, AccessError, SchemeError, CodeError, SimError, ValueError) as exc:
        print(f"qss: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
