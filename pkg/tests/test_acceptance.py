"""
Acceptance suite. Each test prints one PASS/FAIL line (also collected into
the terminal summary) and then asserts the criterion with pinned tolerances.

The trend test runs the full default protocol (30 seeds per arm, 3000 + 3000
iterations) and takes several minutes on one core.
"""

import os
import time
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from qgan_ancilla.adversarial.discriminator import (
    GameContext,
    build_discriminator,
    grad_discriminator,
    grad_generator,
    loss_value,
)
from qgan_ancilla.adversarial.training import EventKind, ScheduleEvent, TrainConfig, train_run
from qgan_ancilla.ansatz import AncillaConfig, build_generator_spec, init_params, params_per_layer
from qgan_ancilla.cli import main
from qgan_ancilla.expressivity import expressivity_study, ordering_verdict
from qgan_ancilla.sim import circuit_unitary, fidelity_hs, projected_fidelity, target_unitary_zzz
from qgan_ancilla.studies import REFERENCE, insertion_config, reference_config, restart_config, run_points

import oracles

N_RUNS = 30
WORKERS = min(os.cpu_count() or 1, 8)


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_1_fidelity_exactness():
    ut = target_unitary_zzz(1.0)
    # oracle: the explicit diagonal gives Tr(U_T) = 4 e^{-i} + 4 e^{i} = 8 cos(1)
    diag = np.exp(-1j * np.array([1, -1, -1, 1, -1, 1, 1, -1]))
    np.testing.assert_allclose(np.diag(ut), diag, atol=1e-15)
    expected = abs(diag.sum()) ** 2 / 64
    err_identity = abs(fidelity_hs(np.eye(8), ut) - expected)
    err_self = abs(fidelity_hs(ut, ut) - 1.0)
    ok = err_identity < 1e-10 and err_self < 1e-12 and abs(expected - np.cos(1) ** 2) < 1e-15
    report(1, ok, f"|F(I,U_T) - cos^2(1)| = {err_identity:.1e}, |F(U_T,U_T) - 1| = {err_self:.1e}")
    assert ok


def test_2_choi_equivalence():
    rng = np.random.default_rng(2024)
    ut = target_unitary_zzz()
    spec = build_generator_spec(3, 3, "NONE")
    plain = []
    for _ in range(200):
        ug = circuit_unitary(spec, init_params(spec, "RANDOM", rng))
        overlap = abs(np.vdot(oracles.choi_explicit(ug), oracles.choi_explicit(ut))) ** 2
        plain.append(abs(fidelity_hs(ug, ut) - overlap))
    target_state = oracles.choi_explicit(np.kron(ut, np.eye(2)), ancilla=True)
    anc = []
    for j in range(200):
        aspec = build_generator_spec(3, 3, ["A1", "A2", "A3", "A4"][j % 4])
        uga = circuit_unitary(aspec, init_params(aspec, "RANDOM", rng))
        overlap = abs(np.vdot(oracles.choi_explicit(uga, ancilla=True), target_state)) ** 2
        anc.append(abs(projected_fidelity(uga, ut) - overlap))
    ok = max(plain) < 1e-10 and max(anc) < 1e-10
    report(2, ok, f"max deviation 6-qubit {max(plain):.1e}, 7-qubit {max(anc):.1e} (200 draws each)")
    assert ok


def _central(f, x, h=1e-5):
    out = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def test_3_gradient_correctness():
    rng = np.random.default_rng(3)
    cfg = TrainConfig()
    spec = build_generator_spec(3, 3, "NONE")
    ctx = GameContext(spec, target_unitary_zzz(), build_discriminator(6, cfg.disc_max_weight))
    # finite differences over every weight are cheap on the weight-2 term set
    ctx2 = GameContext(spec, target_unitary_zzz(), build_discriminator(6, 2))
    gen_err, disc_err = 0.0, 0.0
    for _ in range(50):
        theta = init_params(spec, "RANDOM", rng)
        phi = rng.uniform(-1, 1, ctx.disc.n_terms) / np.sqrt(ctx.disc.n_terms)
        shift = grad_generator(theta, phi, ctx, method="shift")
        fd = _central(lambda t: loss_value(t, phi, ctx), theta)
        gen_err = max(gen_err, np.max(np.abs(shift - fd)) / np.max(np.abs(fd)))
        phi2 = rng.uniform(-1, 1, ctx2.disc.n_terms)
        g = grad_discriminator(theta, phi2, ctx2)
        fd2 = _central(lambda p: loss_value(theta, p, ctx2), phi2)
        disc_err = max(disc_err, np.max(np.abs(g - fd2)))
    ok = gen_err < 1e-6 and disc_err < 1e-8
    report(3, ok, f"generator max rel err {gen_err:.1e} (< 1e-6), discriminator max abs err {disc_err:.1e} (< 1e-8)")
    assert ok


def test_4_parameter_counts():
    expected = {"NONE": 8, "A1": 11, "A2": 10, "A3": 12, "A4": 13}
    got = {c: params_per_layer(3, AncillaConfig(c)) for c in expected}
    built = {c: build_generator_spec(3, 1, c).n_params for c in expected}
    ok = got == expected == built
    report(4, ok, f"per-layer counts {built}")
    assert ok


def test_5_expressivity_ordering():
    t0 = time.perf_counter()
    reports = expressivity_study(["A1", "A3", "A4"], n_layers=1, n_samples=1000, rng=5)
    elapsed = time.perf_counter() - t0
    verdict = ordering_verdict(reports)
    ok = verdict["ordering"] == "PASS" and verdict["zero_param"] == "equal ranks" and elapsed < 60
    report(
        5,
        ok,
        f"generic ranks A1/A3/A4 = {verdict['generic_ranks']}, at zero {verdict['zero_param_ranks']}, "
        f"{elapsed:.1f} s",
    )
    assert ok


def test_6_zero_init_neutrality():
    worst = 0.0
    for config in ["A1", "A2", "A3", "A4"]:
        ev = ScheduleEvent(EventKind.INSERT_ANCILLA, 3000, config=config, init_mode="ZERO")
        rec = train_run(TrainConfig(seed=6, schedule=(ev,)))
        (log,) = rec.events
        assert log["fidelity_before"] == rec.fidelity_trace[3000]
        worst = max(worst, abs(log["fidelity_after"] - log["fidelity_before"]))
    ok = worst < 1e-10
    report(6, ok, f"max fidelity jump at ZERO insertion {worst:.1e} over A1-A4")
    assert ok


def test_7_trend_reproduction():
    base = TrainConfig()
    points = [(REFERENCE, reference_config(base))]
    points += [(f"mid:{c}", insertion_config(base, c, "RANDOM")) for c in ("A3", "A4")]
    points += [(f"start:{c}", insertion_config(base, c, "RANDOM", at=0)) for c in ("A1", "A2", "A3", "A4")]
    points += [(f"ratio={r:g}", restart_config(base, r)) for r in (0.25, 0.5, 0.75, 1.0)]
    res = {label: s for label, s in run_points(points, N_RUNS, WORKERS)}
    ref = res[REFERENCE].f_avg_max
    delta = {k: s.f_avg_max - ref for k, s in res.items()}

    part_i = delta["mid:A4"] > 0 and delta["mid:A3"] > 0
    start = [k for k in delta if k.startswith("start:")]
    part_ii = all(delta[k] <= 0.03 for k in start)
    ratios = [k for k in delta if k.startswith("ratio=")]
    part_iii = all(abs(delta[k]) <= 0.02 for k in ratios)
    ok = part_i and part_ii and part_iii

    def fmt(keys):
        return ", ".join(f"{k} {delta[k]:+.3f}" for k in keys)

    report(
        7,
        ok,
        f"reference F_avg_max {ref:.3f} ({N_RUNS} runs/arm); "
        f"(i) {'ok' if part_i else 'violated'}: {fmt(['mid:A4', 'mid:A3'])}; "
        f"(ii) {'ok' if part_ii else 'violated'}: {fmt(start)}; "
        f"(iii) {'ok' if part_iii else 'violated'}: {fmt(ratios)}",
    )
    for k, s in res.items():
        line = f"    {k:<12} F_avg_max {s.f_avg_max:.4f} +- {s.std_error:.4f}  aborted {s.n_aborted}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    assert all(s.n_runs == N_RUNS and s.n_aborted == 0 for s in res.values())
    assert ok


SMALL_TRAIN = """\
target: {hamiltonian: zzz}
generator: {qubits: 3, layers: 3}
training:
  max_iters_phase1: 60
  max_iters_phase2: 60
  seed: 8
  schedule: [{kind: INSERT_ANCILLA, iteration: 60, config: A4, init_mode: RANDOM}]
study: {kind: SINGLE}
"""

SMALL_SWEEP = """\
target: {hamiltonian: zzz}
generator: {qubits: 3, layers: 3}
training: {max_iters_phase1: 30, max_iters_phase2: 30, seed: 8}
study: {kind: ANCILLA_SWEEP, runs_per_point: 8, configs: [NONE, A3, A4], init_modes: [RANDOM, ZERO]}
"""

SMALL_RANKS = """\
target: {hamiltonian: zzz}
generator: {qubits: 3}
training: {seed: 8}
study: {kind: EXPRESSIVITY, configs: [A1, A3, A4], samples: 50}
"""


def _snapshot(directory: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_8_determinism(tmp_path):
    cases = [("train", SMALL_TRAIN), ("sweep", SMALL_SWEEP), ("expressivity", SMALL_RANKS)]
    mismatches = []
    for verb, text in cases:
        cfg = tmp_path / f"{verb}.yaml"
        cfg.write_text(text)
        outs = []
        for tag, workers in [("w1", 1), ("w8", 8), ("w1b", 1)]:
            out = tmp_path / f"{verb}-{tag}"
            assert main([verb, "--config", str(cfg), "--workers", str(workers), "--out", str(out), "-q"]) == 0
            outs.append(_snapshot(out))
        if not (outs[0] == outs[1] == outs[2] and outs[0]):
            mismatches.append(verb)
    ok = not mismatches
    report(8, ok, "byte-identical artifacts for train, sweep and expressivity at 1 and 8 workers"
           if ok else f"artifacts differ for {mismatches}")
    assert ok
