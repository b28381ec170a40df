from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..sim import ContractError
from .optim import TrainingAborted
from .training import RunRecord, TrainConfig, train_run

log = logging.getLogger(__name__)


def config_hash(config: TrainConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class ExperimentSummary:
    runs: list[dict]
    f_avg_max: float
    std_error: float
    n_runs: int
    n_aborted: int
    config_hash: str
    records: list[RunRecord] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "f_avg_max": self.f_avg_max,
            "std_error": self.std_error,
            "n_runs": self.n_runs,
            "n_aborted": self.n_aborted,
            "config_hash": self.config_hash,
            "runs": self.runs,
        }


def _one(config: TrainConfig) -> RunRecord:
    try:
        return train_run(config)
    except TrainingAborted as exc:
        return exc.record


def summarize(config: TrainConfig, records: list[RunRecord]) -> ExperimentSummary:
    good = np.array([r.f_max for r in records if not r.aborted])
    if good.size:
        mean = float(good.mean())
        err = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
    else:
        mean = err = float("nan")
    return ExperimentSummary(
        runs=[r.digest(j) for j, r in enumerate(records)],
        f_avg_max=mean,
        std_error=err,
        n_runs=len(records),
        n_aborted=int(sum(r.aborted for r in records)),
        config_hash=config_hash(config),
        records=records,
    )


def batch_experiment(config: TrainConfig, n_runs: int, worker_count: int = 1) -> ExperimentSummary:
    """Run ``n_runs`` seeds ``config.seed + j``; results are keyed by ``j``, not by completion."""
    if n_runs < 1:
        raise ContractError("n_runs must be at least 1")
    configs = [dataclasses.replace(config, seed=config.seed + j) for j in range(n_runs)]
    if worker_count <= 1:
        records = [_one(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            records = list(pool.map(_one, configs))
    for j, r in enumerate(records):
        if r.aborted:
            log.warning("run %d (seed %d) aborted: %s", j, r.seed, r.abort_reason)
    return summarize(config, records)
