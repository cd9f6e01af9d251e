"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary.
"""
import time

import numpy as np
import pytest
from scipy import linalg

from twoway_relay.channel import ScenarioConfig, draw_channels, make_pairing
from twoway_relay.harness import cli
from twoway_relay.harness.experiments import rate_region, sumrate_sweep
from twoway_relay.metrics import relay_power, relay_power_relay_domain, sinr, sinr_relay_domain
from twoway_relay.mi import mi_beamformer, scale_bisection, solve_mi
from twoway_relay.mp import mp_beamformer, mp_power
from twoway_relay.reduction import build_couplings, lift, reduce, unvec, vec

from conftest import canonical_pair
from test_mp import _scaled_mi_power, grid_power


def _instance(rng, K=4, M=8):
    powers = 1.0 + 9.0 * rng.random(K)
    ch = draw_channels(K, M, 0.0, rng, powers)
    return ch, reduce(ch)


def _rand_B(rng, K=4):
    return rng.standard_normal((K, K)) + 1j * rng.standard_normal((K, K))


def test_criterion_1_subspace_equivalence(acceptance_line):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        ch, red = _instance(rng)
        B = _rand_B(rng)
        A = lift(B, red.U)
        p = ch.source_powers
        g_red = sinr(B, red, p, 1.0, ch.pairing)
        g_raw = sinr_relay_domain(A, ch.H, p, 1.0, ch.pairing)
        p_red = relay_power(B, red, p, 1.0)
        p_raw = relay_power_relay_domain(A, ch.H, p, 1.0)
        worst = max(worst, np.max(np.abs(g_raw - g_red) / g_red), abs(p_raw - p_red) / p_red)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 10
    acceptance_line("criterion 1 subspace equivalence", ok,
                    f"max rel err {worst:.2e} (< 1e-10), {elapsed:.1f} s (< 10 s), 1000 instances")
    assert ok


def test_criterion_2_kronecker_identities(acceptance_line):
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        ch, red = _instance(rng)
        p, Ht, pm = ch.source_powers, red.Htilde, ch.pairing
        cp = build_couplings(red, p, pm, 1.0)
        Bs = rng.standard_normal((100, 4, 4)) + 1j * rng.standard_normal((100, 4, 4))
        bs = np.stack([vec(B) for B in Bs])
        # T[n, k, j] = h̃_k^T B_n h̃_j evaluated directly
        T = np.einsum("ak,nab,bj->nkj", Ht, Bs, Ht)
        rows = np.einsum("ak,nab->nkb", Ht, Bs)
        for k in range(4):
            kp = pm.partner[k]
            worst = max(worst, np.max(np.abs(bs @ cp.f[k] - np.sqrt(p[kp]) * T[:, k, kp])))
            for row, j in zip(cp.d[k], pm.interferers(k)):
                worst = max(worst, np.max(np.abs(bs @ row - np.sqrt(p[j]) * T[:, k, j])))
            worst = max(worst, np.max(np.abs(np.linalg.norm(bs @ cp.G[k].T, axis=1)
                                             - np.linalg.norm(rows[:, k], axis=1))))
    ok = worst < 1e-12
    acceptance_line("criterion 2 Kronecker identities", ok, f"max abs err {worst:.2e} (< 1e-12), 100x100")
    assert ok


def test_criterion_3_mi_closed_form(acceptance_line):
    rng = np.random.default_rng(303)
    worst_c = worst_s = 0.0
    beaten = 0
    for _ in range(100):
        ch, red = _instance(rng)
        cp = build_couplings(red, ch.source_powers, ch.pairing, 1.0)
        b = solve_mi(cp)
        C, Phi, g = cp.C, cp.Phi, cp.g
        worst_c = max(worst_c, np.max(np.abs(C.conj().T @ b - g)))
        null = linalg.null_space(C.conj().T)
        grad = Phi @ b
        worst_s = max(worst_s, np.linalg.norm(null.conj().T @ grad) / np.linalg.norm(grad))
        obj = np.real(b.conj() @ Phi @ b)
        z = rng.standard_normal((null.shape[1], 1000)) + 1j * rng.standard_normal((null.shape[1], 1000))
        z *= 10.0 ** rng.uniform(-4, 1, 1000)
        cand = b[:, None] + null @ z
        objs = np.real(np.einsum("in,ij,jn->n", cand.conj(), Phi, cand))
        beaten += int(np.any(objs < obj))
    ok = worst_c < 1e-8 and worst_s < 1e-8 and beaten == 0
    acceptance_line("criterion 3 MI closed form", ok,
                    f"constraint {worst_c:.2e}, stationarity {worst_s:.2e} (< 1e-8), "
                    f"instances beaten by a perturbation {beaten}/100")
    assert ok


def test_criterion_4_power_scaling(acceptance_line):
    rng = np.random.default_rng(404)
    worst_a = worst_p = 0.0
    for _ in range(1000):
        ch, red = _instance(rng)
        p = ch.source_powers
        cp = build_couplings(red, p, ch.pairing, 1.0)
        B = unvec(solve_mi(cp), 4)
        target = 10.0 ** rng.uniform(-1, 3)
        cf = np.sqrt(target / relay_power(B, red, p, 1.0))
        alpha = scale_bisection(B, red, p, 1.0, target, delta_alpha=1e-6)
        worst_a = max(worst_a, abs(alpha - cf))
        bf = mi_beamformer(red, ch.pairing, p, 1.0, target)
        worst_p = max(worst_p, abs(relay_power(bf.B, red, p, 1.0) - target) / target)
    ok = worst_a <= 1e-6 and worst_p <= 1e-6
    acceptance_line("criterion 4 power scaling", ok,
                    f"max |alpha - alpha_cf| {worst_a:.2e} (<= 1e-6), max power rel err {worst_p:.2e} (<= 1e-6)")
    assert ok


def test_criterion_5_mp_correctness(acceptance_line):
    ch, red = canonical_pair()
    targets = np.array([0.5, 0.5])
    canonical = mp_power(red, ch.pairing, ch.source_powers, 1.0, targets)
    brute = grid_power(0.5, 0.5, step=1e-4, top=1.5)
    canon_err = abs(canonical - brute)

    rng = np.random.default_rng(505)
    start = time.perf_counter()
    worse_than_mi = inactive = 0
    worst_act = 0.0
    for _ in range(100):
        ch, red = _instance(rng)
        p = ch.source_powers
        bf_mi = mi_beamformer(red, ch.pairing, p, 1.0, 10.0)
        gam = sinr(bf_mi.B, red, p, 1.0, ch.pairing) * rng.uniform(0.3, 1.0, 4)
        bf = mp_beamformer(red, ch.pairing, p, 1.0, gam)
        power = relay_power(bf.B, red, p, 1.0)
        worse_than_mi += int(power > _scaled_mi_power(red, ch, gam) * (1 + 1e-6))
        slack = np.min(sinr(bf.B, red, p, 1.0, ch.pairing) / gam - 1.0)
        worst_act = max(worst_act, abs(slack))
        inactive += int(abs(slack) > 1e-4)
    elapsed = time.perf_counter() - start
    ok = canon_err <= 1e-3 and worse_than_mi == 0 and inactive == 0 and elapsed < 60
    acceptance_line("criterion 5 MP correctness", ok,
                    f"canonical power {canonical:.6f} vs grid {brute:.6f} (|diff| {canon_err:.1e} <= 1e-3); "
                    f"MP > scaled MI on {worse_than_mi}/100; no active constraint on {inactive}/100 "
                    f"(worst slack {worst_act:.1e}); {elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_6_rate_region_agreement(acceptance_line):
    cfg = ScenarioConfig(4, 8, 10.0, 10.0, correlation=0.0, seed=2024, trials=2000)
    start = time.perf_counter()
    points = rate_region(cfg, num_points=7)
    elapsed = time.perf_counter() - start
    mi = [p for p in points if p.scheme == "MI"]
    mp = [p for p in points if p.scheme == "MP"]
    failures, worst_rel, worst_z = [], 0.0, 0.0
    for a, b in zip(mi, mp):
        for ra, rb, sa, sb in ((a.rate_pair1, b.rate_pair1, a.stderr1, b.stderr1),
                               (a.rate_pair2, b.rate_pair2, a.stderr2, b.stderr2)):
            if rb == 0 and ra == 0:
                continue
            combined = np.hypot(sa, sb)
            z = abs(rb - ra) / combined
            worst_z = max(worst_z, z)
            worst_rel = max(worst_rel, abs(rb - ra) / rb)
            if z > 2.0:
                failures.append(f"theta={a.sweep_param:.3f}: MI {ra:.4f} MP {rb:.4f} ({z:.2f} se)")
    ok = not failures
    detail = (f"{cfg.trials} trials x 7 rays, max gap {worst_z:.2f} combined se (<= 2), "
              f"max relative gap {worst_rel:.2%} (target <~3%), {elapsed:.0f} s")
    if failures:
        detail += "; outside: " + "; ".join(failures)
    acceptance_line("criterion 6 MI/MP rate regions coincide", ok, detail)
    assert ok


def test_criterion_7_grouping_crossover(acceptance_line):
    cfg = ScenarioConfig(8, 8, 10.0, 10.0, correlation=0.0, seed=7, trials=2000)
    rows, res = sumrate_sweep(cfg, snr_grid_db=(0.0, 20.0), groups=(1, 2, 4))
    table = {(r.snr_db, r.N): r for r in rows}

    def margin(snr, hi, lo):
        a, b = table[(snr, hi)], table[(snr, lo)]
        return (a.sum_rate - b.sum_rate) / np.hypot(a.stderr, b.stderr)

    low, high = margin(0.0, 4, 1), margin(20.0, 1, 4)
    samples = res.samples
    envelope_ok = bool(np.all(samples[:, :, -1] >= samples[:, :, :-1].max(axis=2)))
    ok = low > 2 and high > 2 and envelope_ok
    acceptance_line(
        "criterion 7 grouping crossover", ok,
        f"0 dB: N=4 {table[(0.0, 4)].sum_rate:.3f} vs N=1 {table[(0.0, 1)].sum_rate:.3f} ({low:.1f} se); "
        f"20 dB: N=1 {table[(20.0, 1)].sum_rate:.3f} vs N=4 {table[(20.0, 4)].sum_rate:.3f} ({high:.1f} se); "
        f"envelope per realization {'ok' if envelope_ok else 'violated'}; {cfg.trials} trials")
    assert ok


def test_criterion_8_validate_command(acceptance_line, capsys):
    code = cli.run(["validate"])
    out = capsys.readouterr().out
    ok = code == 0 and "result=PASS" in out
    acceptance_line("criterion 8 validate (monotonicity, determinism, invariants)", ok,
                    f"exit code {code}; " + out.strip().splitlines()[-1])
    assert ok
