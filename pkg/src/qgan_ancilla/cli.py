"""
Command line front end.

    qgan-ancilla train --config run.yaml [--seed N] [--out DIR]
    qgan-ancilla sweep --config sweep.yaml [--workers K]
    qgan-ancilla expressivity --config ranks.yaml

Exit status: 0 success, 1 a training run aborted, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import plotting
from .adversarial.batch import config_hash
from .adversarial.optim import TrainingAborted
from .adversarial.training import train_run
from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig, load_config
from .expressivity import expressivity_study, ordering_verdict
from .sim import target_unitary_zzz
from .studies import ancilla_sweep, restart_sweep, run_points, timing_sweep

log = logging.getLogger("qgan_ancilla")

EXIT_OK, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2
SWEEP_KINDS = ("ANCILLA_SWEEP", "TIMING_SWEEP", "RESTART_SWEEP")


def _write_json(path: Path, doc: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _trace_rows(run_id: int, record):
    for i, (f, loss, ev) in enumerate(zip(record.fidelity_trace, record.loss_trace, record.event_trace)):
        yield run_id, i, repr(f), repr(loss), ev


def cmd_train(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    if cfg.study_kind != "SINGLE":
        raise ConfigError(f"'train' needs study.kind SINGLE, got {cfg.study_kind}")
    target = target_unitary_zzz(cfg.target_time)
    status = EXIT_OK
    try:
        record = train_run(cfg.train, target)
    except TrainingAborted as exc:
        log.error("training aborted: %s", exc)
        record, status = exc.record, EXIT_ABORT
    if "json" in cfg.formats:
        _write_json(out / "run.json", {
            "command": "train",
            "config": cfg.raw,
            "train_config": cfg.train.to_dict(),
            "config_hash": config_hash(cfg.train),
            "record": record.to_dict(),
        })
    if "csv" in cfg.formats:
        _write_csv(out / "trace.csv", ["run_id", "iteration", "fidelity", "loss", "event"], _trace_rows(0, record))
    if "png" in cfg.formats:
        plotting.plot_trace(record, out / "fidelity.png")
    log.info("F_max %.4f, stop iteration %s", record.f_max, record.stop_iteration)
    return status


def sweep_points(cfg: ExperimentConfig):
    st, base = cfg.study, cfg.train
    if cfg.study_kind == "ANCILLA_SWEEP":
        return ancilla_sweep(base, st["configs"], st["init_modes"])
    if cfg.study_kind == "TIMING_SWEEP":
        return timing_sweep(base, st["configs"], st["timings"])
    if cfg.study_kind == "RESTART_SWEEP":
        return restart_sweep(base, st["ratios"])
    raise ConfigError(f"'sweep' needs a sweep study kind {SWEEP_KINDS}, got {cfg.study_kind}")


def cmd_sweep(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    points = sweep_points(cfg)
    n_runs = cfg.runs_per_point()

    def progress(label, summary):
        log.info("%-20s F_avg_max %.4f +- %.4f (%d runs)", label, summary.f_avg_max, summary.std_error, summary.n_runs)

    results = run_points(points, n_runs, workers, progress)
    rows = [
        {"point": label, "f_avg_max": s.f_avg_max, "std_error": s.std_error, "n_runs": s.n_runs,
         "n_aborted": s.n_aborted, "config_hash": s.config_hash}
        for label, s in results
    ]
    if "csv" in cfg.formats:
        _write_csv(out / "sweep.csv", ["point", "f_avg_max", "std_error", "n_runs", "n_aborted"],
                   [[r["point"], repr(r["f_avg_max"]), repr(r["std_error"]), r["n_runs"], r["n_aborted"]] for r in rows])
    if "json" in cfg.formats:
        _write_json(out / "sweep.json", {
            "command": "sweep",
            "kind": cfg.study_kind,
            "config": cfg.raw,
            "points": [
                {"point": label, "train_config": c.to_dict(), "summary": s.to_dict()}
                for (label, c), (_, s) in zip(points, results)
            ],
        })
    if "png" in cfg.formats:
        plotting.plot_sweep(rows, out / "sweep.png", title=cfg.study_kind)
    return EXIT_ABORT if any(r["n_aborted"] for r in rows) else EXIT_OK


def cmd_expressivity(cfg: ExperimentConfig, out: Path, workers: int) -> int:
    if cfg.study_kind != "EXPRESSIVITY":
        raise ConfigError(f"'expressivity' needs study.kind EXPRESSIVITY, got {cfg.study_kind}")
    st = cfg.study
    reports = expressivity_study(st["configs"], st["layers"], st["samples"], cfg.train.seed,
                                 n_qubits=cfg.train.n_qubits, rel_tol=st["rel_tol"])
    verdict = ordering_verdict(reports)
    if "csv" in cfg.formats:
        _write_csv(out / "ranks.csv", ["config", "sample_id", "rank"],
                   ([r.config.value, i, k] for r in reports for i, k in enumerate(r.ranks)))
    if "json" in cfg.formats:
        _write_json(out / "expressivity.json", {
            "command": "expressivity",
            "config": cfg.raw,
            "seed": cfg.train.seed,
            "reports": [r.to_dict() for r in reports],
        })
    _write_json(out / "verdict.json", verdict)
    if "png" in cfg.formats:
        plotting.plot_rank_histograms(reports, out / "ranks.png")
    log.info("ordering %s, zero parameters: %s", verdict["ordering"], verdict["zero_param"])
    return EXIT_OK


COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "expressivity": cmd_expressivity}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgan-ancilla", description="Adversarial unitary learning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML experiment file")
        p.add_argument("--seed", type=int, help="overrides training.seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--out", type=Path, help="overrides output.directory")
        p.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative", "command line")
            cfg.train = dataclasses.replace(cfg.train, seed=args.seed)
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1", "command line")
        out = args.out or cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
