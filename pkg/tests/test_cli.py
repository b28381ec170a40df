import csv
import json

import pytest

from qgan_ancilla.cli import main

SINGLE = """\
target: {hamiltonian: zzz}
generator: {qubits: 3, layers: 2}
training:
  max_iters_phase1: 20
  max_iters_phase2: 20
  seed: 1
  schedule: [{kind: INSERT_ANCILLA, iteration: 20, config: A4, init_mode: RANDOM}]
study: {kind: SINGLE}
"""

SWEEP = """\
target: {hamiltonian: zzz}
generator: {qubits: 3, layers: 2}
training: {max_iters_phase1: 8, max_iters_phase2: 8, seed: 3}
study: {kind: %s, runs_per_point: 2, configs: [NONE, A1, A4], init_modes: [RANDOM, ZERO], timings: [start, mid], ratios: [0, 0.5]}
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(args):
    return main([*args, "-q"])


def test_train_outputs(tmp_path):
    cfg = write(tmp_path, "c.yaml", SINGLE)
    assert run(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = tmp_path / "o"
    doc = json.loads((out / "run.json").read_text())
    assert doc["schema_version"] == 1 and doc["record"]["events"][0]["iteration"] == 20
    rows = list(csv.DictReader(open(out / "trace.csv")))
    assert len(rows) == 41 and rows[0].keys() == {"run_id", "iteration", "fidelity", "loss", "event"}
    assert (out / "fidelity.png").stat().st_size > 0


def test_seed_override_and_repeatability(tmp_path):
    cfg = write(tmp_path, "c.yaml", SINGLE)
    for name, seed in [("a", "5"), ("b", "5"), ("c", "6")]:
        assert run(["train", "--config", cfg, "--seed", seed, "--out", str(tmp_path / name)]) == 0
    read = lambda d, f: (tmp_path / d / f).read_bytes()
    for f in ["run.json", "trace.csv", "fidelity.png"]:
        assert read("a", f) == read("b", f)
    assert read("a", "trace.csv") != read("c", "trace.csv")


def test_missing_key_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", SINGLE.replace("target: {hamiltonian: zzz}\n", ""))
    assert run(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "target" in capsys.readouterr().err


def test_wrong_verb_for_study(tmp_path):
    cfg = write(tmp_path, "c.yaml", SINGLE)
    assert run(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert run(["expressivity", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_bad_flags(tmp_path):
    cfg = write(tmp_path, "c.yaml", SINGLE)
    assert run(["train", "--config", cfg, "--workers", "0"]) == 2
    assert run(["train", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_abort_exit_code(tmp_path, monkeypatch):
    import numpy as np

    from qgan_ancilla import cli

    def nan_target(t):
        u = np.eye(8, dtype=complex)
        u[0, 0] = np.nan
        return u

    monkeypatch.setattr(cli, "target_unitary_zzz", nan_target)
    cfg = write(tmp_path, "c.yaml", SINGLE)
    assert run(["train", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert json.loads((tmp_path / "o" / "run.json").read_text())["record"]["aborted"]


def sweep_rows(path):
    return list(csv.DictReader(open(path / "sweep.csv")))


def test_ancilla_sweep_table(tmp_path):
    cfg = write(tmp_path, "s.yaml", SWEEP % "ANCILLA_SWEEP")
    assert run(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = sweep_rows(tmp_path / "o")
    assert [r["point"] for r in rows] == ["reference", "NONE", "A1:RANDOM", "A1:ZERO", "A4:RANDOM", "A4:ZERO"]
    assert rows[0]["f_avg_max"] == rows[1]["f_avg_max"]
    assert all(r["n_runs"] == "2" for r in rows)
    doc = json.loads((tmp_path / "o" / "sweep.json").read_text())
    assert doc["kind"] == "ANCILLA_SWEEP" and len(doc["points"]) == 6


@pytest.mark.parametrize("kind,points", [
    ("TIMING_SWEEP", ["reference", "start:A1", "start:A4", "mid:A1", "mid:A4"]),
    ("RESTART_SWEEP", ["reference", "ratio=0", "ratio=0.5"]),
])
def test_other_sweeps(tmp_path, kind, points):
    cfg = write(tmp_path, "s.yaml", SWEEP % kind)
    assert run(["sweep", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = sweep_rows(tmp_path / "o")
    assert [r["point"] for r in rows] == points
    if kind == "RESTART_SWEEP":
        assert rows[0]["f_avg_max"] == rows[1]["f_avg_max"]


def test_expressivity_command(tmp_path):
    text = "target: {hamiltonian: zzz}\ngenerator: {}\nstudy: {kind: EXPRESSIVITY, configs: [A1, A3, A4], samples: 1}\n"
    cfg = write(tmp_path, "e.yaml", text)
    assert run(["expressivity", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    verdict = json.loads((tmp_path / "o" / "verdict.json").read_text())
    assert verdict["ordering"] == "PASS" and verdict["zero_param"] == "equal ranks"
    rows = list(csv.DictReader(open(tmp_path / "o" / "ranks.csv")))
    assert len(rows) == 3
    report = json.loads((tmp_path / "o" / "expressivity.json").read_text())["reports"][0]
    assert sum(report["histogram"].values()) == 1
