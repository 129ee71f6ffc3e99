import itertools
import math

import numpy as np
import pytest

from qsslab.access import threshold
from qsslab.classical import Tape, UnauthorizedError
from qsslab.compiler import (PresetError, Deal, embed, prepare_secret, preset, qss_reconstruct, qss_share,
                             size_report, spanning_family, verify_correctness, verify_privacy)
from qsslab.qecc import copies_required
from qsslab.qsim import partial_trace


def subsets(n):
    for k in range(n + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def secret_fidelity(scheme, amplitudes, P, seed=7):
    v = embed(amplitudes, scheme.secret_dim)
    deal = qss_share(scheme, prepare_secret(v, scheme.copies), Tape(seed=seed))
    rho = partial_trace(qss_reconstruct(scheme, deal, P), ["out"]).matrix
    return float(np.real(v.conj() @ rho @ v))


PRESETS = [
    "perfect:th(2,3)",
    "perfect:minsets{{1,2,3},{2,3,4}}",
    "multicopy:th(2,4)",
    "weighted:auto;w=2,1,1;t=3;ss=formula",
    "tree:th(2, x1, x2, th(2, x3, x4, x5))",
    "leaky:th(2,3);eps=1/4",
    "longmsg:3,2,12",
]


@pytest.mark.parametrize("name", PRESETS)
def test_realized_structure_dominates_f(name):
    s = preset(name)
    assert s.qc.realized().dominates(s.f)


@pytest.mark.parametrize("name", PRESETS)
def test_correct_on_every_authorized_set(name):
    s = preset(name)
    for P in subsets(s.n):
        if s.f.evaluate(P):
            assert verify_correctness(s, P, seeds=(0,)) == pytest.approx(1, abs=1e-8)


def test_perfect_preset_shape():
    s = preset("perfect:minsets{{1,2,3},{2,3,4}}")
    assert s.qc.name == "shamir:3,4,5"
    assert s.secret_dim == 5 and s.copies == 1


def test_basis_and_superposition_secrets():
    s = preset("perfect:th(2,3)")
    assert secret_fidelity(s, [1, 0, 0], [1, 2]) == pytest.approx(1, abs=1e-10)
    half = [1 / math.sqrt(2), 1 / math.sqrt(2)]
    for P in ([1, 2], [1, 3], [2, 3]):
        assert secret_fidelity(s, half, P) == pytest.approx(1, abs=1e-10)


def test_unauthorized_reconstruction_raises():
    s = preset("perfect:th(2,3)")
    deal = qss_share(s, prepare_secret([1, 0, 0]), Tape(seed=1))
    with pytest.raises(UnauthorizedError):
        qss_reconstruct(s, deal, [1])
    with pytest.raises(UnauthorizedError):
        verify_correctness(s, [2])


def test_or_is_rejected():
    with pytest.raises(PresetError, match="no-cloning"):
        preset("perfect:th(1,2)")


@pytest.mark.parametrize("bad", ["perfect", "nosuch:th(2,3)", "weighted:auto;t=2", "multicopy:minsets{{1,2},{2,3}}",
                                 "weighted:auto;w=1,1,1;t=1"])
def test_bad_presets(bad):
    with pytest.raises(PresetError):
        preset(bad)


def test_secret_dimension_mismatch():
    s = preset("perfect:th(2,3)")
    with pytest.raises(PresetError):
        qss_share(s, prepare_secret([1, 0]), Tape(seed=0))
    with pytest.raises(PresetError):
        embed([1, 0, 0, 0], 3)


def test_deal_replay_and_round_trip():
    s = preset("perfect:th(2,3)")
    sec = prepare_secret([0.6, 0.8j, 0])
    a = qss_share(s, sec, Tape(seed=99)).to_json()
    b = qss_share(s, sec, Tape(seed=99)).to_json()
    assert a == b
    back = Deal.from_json(a, s)
    assert back.to_json() == a
    rho = partial_trace(qss_reconstruct(s, back, [1, 3]), ["out"]).matrix
    v = sec.amplitudes
    assert np.real(v.conj() @ rho @ v) == pytest.approx(1, abs=1e-10)


def test_explicit_tape_matches_seed_draw():
    s = preset("perfect:th(2,3)")
    seeded = Tape(seed=5)
    explicit = Tape(values=seeded.draw(s.tape_moduli))
    sec = prepare_secret([0, 1, 0])
    da, db = qss_share(s, sec, seeded), qss_share(s, sec, explicit)
    assert np.allclose(da.state.amplitudes, db.state.amplitudes)
    assert da.classical_hex() == db.classical_hex()


def test_deal_for_other_scheme_is_rejected():
    s = preset("perfect:th(2,3)")
    text = qss_share(s, prepare_secret([1, 0, 0]), Tape(seed=0)).to_json()
    with pytest.raises(PresetError):
        Deal.from_json(text, preset("leaky:th(2,3)"))


def test_party_map_covers_every_register():
    s = preset("tree:th(2, x1, x2, th(2, x3, x4, x5))")
    deal = qss_share(s, prepare_secret([1, 0, 0]), Tape(seed=0))
    regs = sorted(sum(deal.party_map.values(), []) + deal.environment)
    labels = deal.state.system.labels
    assert regs == sorted(labels.index(f"q{r}") for r in range(len(s.qc.register_dims)))


@pytest.mark.parametrize("name", ["perfect:th(2,3)", "perfect:minsets{{1,2,3},{2,3,4}}",
                                  "tree:th(2, x1, x2, th(2, x3, x4, x5))"])
def test_perfect_privacy_exhaustive(name):
    s = preset(name)
    for P in subsets(s.n):
        if not s.f.evaluate(P):
            r = verify_privacy(s, P)
            assert r.mode == "exact" and r.max_distance <= 1e-10


def test_privacy_rejects_authorized_set():
    with pytest.raises(ValueError):
        verify_privacy(preset("perfect:th(2,3)"), [1, 2])


def test_statistical_fallback_reports_radius():
    s = preset("perfect:th(2,3)")
    r = verify_privacy(s, [1], mode="statistical", samples=256, seed=1)
    assert r.mode == "statistical" and r.samples == 256 and r.radius > 0
    assert r.max_distance <= 3 * r.radius


def test_spanning_family_spans_operators():
    d = 3
    fam = spanning_family(d)
    ops = np.array([np.outer(v, v.conj()).reshape(-1) for v in fam])
    assert np.linalg.matrix_rank(ops) == d * d


def test_weighted_preset_weight_three():
    s = preset("weighted:auto;w=2,1,1;t=3")
    assert verify_correctness(s, [1, 2], seeds=(0,)) == pytest.approx(1, abs=1e-8)
    assert not s.f.evaluate([2, 3])


def test_multicopy_preset():
    s = preset("multicopy:th(2,4)")
    assert s.copies == copies_required(2, 4) == 2
    deal = qss_share(s, prepare_secret(embed([1, 1j], 5), 2), Tape(seed=3))
    assert all(len(v) == 1 for v in deal.party_map.values())
    assert size_report(s).quantum_bits == {i: pytest.approx(math.log2(5)) for i in range(1, 5)}
    assert s.qc.realized().dominates(threshold(2, 4))


def test_yao_preset_reconstructs_through_chained_gates():
    s = preset("yao:and(x1,th(2,x2,x3,x4))")
    assert verify_correctness(s, [1, 3, 4], seeds=(0,)) == pytest.approx(1, abs=1e-8)
    deal = qss_share(s, prepare_secret(embed([1], s.secret_dim)), Tape(seed=0))
    with pytest.raises(UnauthorizedError):
        qss_reconstruct(s, deal, [2, 3, 4])


def test_size_report_counts():
    r = size_report(preset("perfect:th(2,3)"))
    assert r.quantum_bits == {i: pytest.approx(math.log2(3)) for i in (1, 2, 3)}
    assert r.counted_total == pytest.approx(r.quantum_total + r.classical_total)
    top = max(r.quantum_bits[i] + r.classical_bits[i] for i in (1, 2, 3))
    assert r.information_ratio == pytest.approx(top / math.log2(3))
    assert r.formula_total is not None and r.long_message is None


def test_size_report_long_message():
    lm = size_report(preset("longmsg:3,2,12")).long_message
    assert (lm["N"], lm["r"], lm["K"], lm["c"]) == (30, 5, 17, 10)
    assert lm["ok"] and lm["ratio"] == pytest.approx(150 / 36) and lm["ratio"] <= lm["bound"] == 32


def test_long_message_key_comes_from_prg():
    s = preset("longmsg:3,2,12")
    keys = {s.key_of(x) for x in range(s.classical_secrets)}
    assert all(0 <= k < s.key_count for k in keys)
    assert len(keys) > 1
    assert s.key_of(17) == s.key_of(17)
