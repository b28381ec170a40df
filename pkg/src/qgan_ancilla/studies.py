"""
Sweep points for the three training studies: ancilla configuration and
initialization, insertion timing, and partial random restarts.

Each point is a ``(label, TrainConfig)`` pair. Points that resolve to the
same configuration are run once and share one summary.
"""

from __future__ import annotations

import dataclasses
from typing import Iterable, Sequence

from .ansatz import AncillaConfig, InitMode
from .adversarial.batch import ExperimentSummary, batch_experiment, config_hash
from .adversarial.training import EventKind, ScheduleEvent, TrainConfig

REFERENCE = "reference"


def reference_config(base: TrainConfig) -> TrainConfig:
    """No ancilla, no events, the full two-phase budget."""
    return dataclasses.replace(base, ancilla=AncillaConfig.NONE, schedule=())


def insertion_config(base: TrainConfig, config, init_mode=InitMode.RANDOM, at: int | None = None) -> TrainConfig:
    at = base.max_iters_phase1 if at is None else at
    if AncillaConfig(config) is AncillaConfig.NONE:
        return reference_config(base)
    event = ScheduleEvent(EventKind.INSERT_ANCILLA, at, config=config, init_mode=init_mode)
    return dataclasses.replace(base, ancilla=AncillaConfig.NONE, schedule=(event,))


def restart_config(base: TrainConfig, ratio: float) -> TrainConfig:
    event = ScheduleEvent(EventKind.RANDOM_RESTART, base.max_iters_phase1, ratio=ratio)
    return dataclasses.replace(base, ancilla=AncillaConfig.NONE, schedule=(event,))


def ancilla_sweep(base: TrainConfig, configs: Iterable, init_modes: Iterable) -> list[tuple[str, TrainConfig]]:
    points = [(REFERENCE, reference_config(base))]
    init_modes = [InitMode(m) for m in init_modes]
    for c in map(AncillaConfig, configs):
        if c is AncillaConfig.NONE:
            points.append((c.value, reference_config(base)))
            continue
        for m in init_modes:
            points.append((f"{c.value}:{m.value}", insertion_config(base, c, m)))
    return points


def timing_sweep(base: TrainConfig, configs: Iterable, timings: Iterable[str], init_mode=InitMode.RANDOM):
    """``start`` inserts before the first update, ``mid`` after phase one."""
    points = [(REFERENCE, reference_config(base))]
    for t in timings:
        if t not in ("start", "mid"):
            raise ValueError(f"unknown timing {t!r}")
        for c in map(AncillaConfig, configs):
            if c is AncillaConfig.NONE:
                continue
            at = 0 if t == "start" else base.max_iters_phase1
            points.append((f"{t}:{c.value}", insertion_config(base, c, init_mode, at)))
    return points


def restart_sweep(base: TrainConfig, ratios: Sequence[float]) -> list[tuple[str, TrainConfig]]:
    points = [(REFERENCE, reference_config(base))]
    points += [(f"ratio={r:g}", restart_config(base, r)) for r in ratios]
    return points


def run_points(points, n_runs: int, workers: int = 1, progress=None) -> list[tuple[str, ExperimentSummary]]:
    """One batch per distinct configuration, in point order."""
    cache: dict[str, ExperimentSummary] = {}
    out = []
    for label, cfg in points:
        key = config_hash(cfg)
        if key not in cache:
            cache[key] = batch_experiment(cfg, n_runs, workers)
            if progress:
                progress(label, cache[key])
        out.append((label, cache[key]))
    return out
