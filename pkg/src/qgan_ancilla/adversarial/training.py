"""
Alternating minimax training of the generator circuit against the Pauli-sum
discriminator, with mid-run schedule events (ancilla insertion, randomized
restart).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..ansatz import AncillaConfig, GeneratorSpec, InitMode, build_generator_spec, extend_with_ancilla, init_params
from ..sim import ContractError, target_unitary_zzz
from .discriminator import GameContext, build_discriminator
from .optim import Adam, TrainingAborted, project_weights
from .players import extended_discriminator, make_player

log = logging.getLogger(__name__)


class EventKind(str, enum.Enum):
    INSERT_ANCILLA = "INSERT_ANCILLA"
    RANDOM_RESTART = "RANDOM_RESTART"


@dataclass(frozen=True)
class ScheduleEvent:
    """Applied after ``iteration`` completed updates (0 = before training)."""

    kind: EventKind
    iteration: int
    config: AncillaConfig = AncillaConfig.NONE
    init_mode: InitMode = InitMode.RANDOM
    ratio: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "config", AncillaConfig(self.config))
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))
        if self.iteration < 0:
            raise ContractError("event iteration must be non-negative")
        if self.kind is EventKind.INSERT_ANCILLA and self.config is AncillaConfig.NONE:
            raise ContractError("INSERT_ANCILLA needs an ancilla configuration")
        if not 0.0 <= self.ratio <= 1.0:
            raise ContractError(f"restart ratio {self.ratio} outside [0, 1]")

    def label(self) -> str:
        if self.kind is EventKind.INSERT_ANCILLA:
            return f"INSERT_ANCILLA:{self.config.value}:{self.init_mode.value}"
        return f"RANDOM_RESTART:{self.ratio:g}"


@dataclass(frozen=True)
class TrainConfig:
    n_qubits: int = 3
    n_layers: int = 3
    ancilla: AncillaConfig = AncillaConfig.NONE
    max_iters_phase1: int = 3000
    max_iters_phase2: int = 3000
    fidelity_threshold: float = 0.99
    lr_generator: float = 0.01
    lr_discriminator: float = 0.1
    disc_steps_per_iter: int = 1
    gen_steps_per_iter: int = 1
    seed: int = 0
    schedule: tuple[ScheduleEvent, ...] = ()
    # None keeps every Pauli string on the Choi register
    disc_max_weight: Optional[int] = None
    clip_bound: float = 1.0
    clip_mode: str = "l2"
    disc_optimizer: str = "sgd"

    def __post_init__(self):
        object.__setattr__(self, "ancilla", AncillaConfig(self.ancilla))
        object.__setattr__(self, "schedule", tuple(self.schedule))
        if not 0.0 < self.fidelity_threshold <= 1.0:
            raise ContractError("fidelity_threshold must lie in (0, 1]")
        if self.max_iters_phase1 < 0 or self.max_iters_phase2 < 0:
            raise ContractError("iteration counts must be non-negative")
        if self.lr_generator <= 0 or self.lr_discriminator <= 0:
            raise ContractError("learning rates must be positive")
        if self.disc_steps_per_iter < 1 or self.gen_steps_per_iter < 1:
            raise ContractError("steps per iteration must be at least 1")
        if self.disc_max_weight is not None and self.disc_max_weight < 1:
            raise ContractError("disc_max_weight must be at least 1")
        if self.clip_bound <= 0:
            raise ContractError("clip_bound must be positive")
        if self.clip_mode not in ("l2", "box"):
            raise ContractError(f"clip_mode must be 'l2' or 'box', got {self.clip_mode!r}")
        if self.disc_optimizer not in ("sgd", "adam"):
            raise ContractError(f"disc_optimizer must be 'sgd' or 'adam', got {self.disc_optimizer!r}")

    @property
    def total_iters(self) -> int:
        return self.max_iters_phase1 + self.max_iters_phase2

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ancilla"] = self.ancilla.value
        out["schedule"] = [
            {"kind": e.kind.value, "iteration": e.iteration, "config": e.config.value,
             "init_mode": e.init_mode.value, "ratio": e.ratio}
            for e in self.schedule
        ]
        return out


class TrainState:
    """Generator parameters, discriminator player and their optimizers."""

    def __init__(self, spec: GeneratorSpec, theta: np.ndarray, player, opt_gen: Adam, target: np.ndarray):
        self.spec = spec
        self.theta = theta
        self.player = player
        self.opt_gen = opt_gen
        self.target = target
        self.iteration = 0

    @property
    def ctx(self) -> GameContext:
        return self.player.ctx

    @property
    def disc(self):
        return self.player.ctx.disc

    @property
    def phi(self) -> np.ndarray:
        return self.player.phi

    @property
    def opt_disc(self):
        return self.player.optimizer

    def fidelity(self) -> float:
        return self.ctx.fidelity_from_output(self.ctx.circuit.output(self.theta))


@dataclass
class RunRecord:
    seed: int
    fidelity_trace: list[float] = field(default_factory=list)
    loss_trace: list[float] = field(default_factory=list)
    event_trace: list[str] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    stop_iteration: Optional[int] = None
    final_theta: list[float] = field(default_factory=list)
    final_phi: list[float] = field(default_factory=list)
    final_ancilla: str = AncillaConfig.NONE.value
    aborted: bool = False
    abort_reason: str = ""

    @property
    def f_max(self) -> float:
        return max(self.fidelity_trace) if self.fidelity_trace else float("nan")

    def digest(self, run_id: int) -> dict:
        return {
            "run_id": run_id,
            "seed": self.seed,
            "f_max": self.f_max,
            "stop_iteration": self.stop_iteration,
            "n_iterations": len(self.fidelity_trace) - 1,
            "final_ancilla": self.final_ancilla,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["f_max"] = self.f_max
        return out


def initial_state(config: TrainConfig, target: np.ndarray, rng: np.random.Generator, dense: bool = True) -> TrainState:
    """Random generator angles; discriminator weights uniform in the clip box, then projected."""
    target = np.asarray(target, dtype=complex)
    spec = build_generator_spec(config.n_qubits, config.n_layers, config.ancilla)
    theta = init_params(spec, InitMode.RANDOM, rng)
    disc = build_discriminator(2 * config.n_qubits + int(spec.has_ancilla), config.disc_max_weight, config.clip_bound)
    phi = rng.uniform(-config.clip_bound, config.clip_bound, size=disc.n_terms)
    phi = project_weights(phi, config.clip_bound, config.clip_mode)
    ctx = GameContext(spec, target, disc)
    player = make_player(ctx, phi, config.disc_optimizer, config.lr_discriminator, config.clip_mode, dense)
    return TrainState(spec, theta, player, Adam(spec.n_params, lr=config.lr_generator), target)


def optimizer_step(state: TrainState, grads: np.ndarray, which: str) -> TrainState:
    """Generator descends; discriminator ascends and is projected. Updates ``state`` in place."""
    if which == "GENERATOR":
        state.theta = state.opt_gen.step(state.theta, grads)
    elif which == "DISCRIMINATOR":
        state.player.ascend(np.asarray(grads))
    else:
        raise ValueError(f"unknown player {which!r}")
    return state


def apply_schedule_event(state: TrainState, event: ScheduleEvent, rng: np.random.Generator) -> TrainState:
    if event.kind is EventKind.INSERT_ANCILLA:
        if state.spec.has_ancilla:
            raise ContractError("ancilla already present; double insertion")
        old_spec = state.spec
        new_spec, theta = extend_with_ancilla(old_spec, state.theta, event.config, event.init_mode, rng)
        slot = new_spec.slot_map()
        state.opt_gen.remap(new_spec.n_params, np.array([slot[g.key] for g in old_spec.gates]))
        ctx = GameContext(new_spec, state.target, extended_discriminator(state.disc))
        state.player.extend(ctx)
        state.spec, state.theta = new_spec, theta
    else:
        n = math.ceil(event.ratio * state.theta.size)
        if n:
            theta = state.theta.copy()
            idx = np.sort(rng.choice(theta.size, size=n, replace=False))
            theta[idx] = rng.uniform(0.0, 2 * math.pi, size=n)
            state.theta = theta
    return state


def train_run(config: TrainConfig, target: np.ndarray | None = None, dense: bool = True) -> RunRecord:
    """One seeded training run; deterministic given ``config``.

    Row ``i`` of the traces is measured after ``i`` iterations. Training stops
    at the first row whose fidelity reaches the threshold. ``dense=False``
    forces the explicit-weight discriminator even where the dense one is exact.
    """
    if target is None:
        target = target_unitary_zzz(1.0)
    rng = np.random.default_rng(config.seed)
    state = initial_state(config, target, rng, dense)
    record = RunRecord(seed=config.seed)
    by_iter: dict[int, list[ScheduleEvent]] = {}
    for ev in config.schedule:
        by_iter.setdefault(ev.iteration, []).append(ev)

    def run_events(it: int) -> str:
        labels = []
        for ev in by_iter.get(it, ()):
            before = state.fidelity()
            apply_schedule_event(state, ev, rng)
            after = state.fidelity()
            record.events.append(
                {"iteration": it, "event": ev.label(), "fidelity_before": before, "fidelity_after": after}
            )
            labels.append(ev.label())
        return ";".join(labels)

    def measure(k: np.ndarray, cache, label: str) -> float:
        f = state.ctx.fidelity_from_output(k)
        loss = state.player.score(k, cache)
        if not (np.isfinite(f) and np.isfinite(loss)):
            raise TrainingAborted(f"non-finite fidelity/loss at iteration {state.iteration}")
        record.fidelity_trace.append(f)
        record.loss_trace.append(loss)
        record.event_trace.append(label)
        return f

    try:
        label = run_events(0)
        states = state.ctx.circuit.forward(state.theta)
        cache = state.player.prepare(states[-1])
        f = measure(states[-1], cache, label)
        while f < config.fidelity_threshold and state.iteration < config.total_iters:
            if state.iteration > 0:
                label = run_events(state.iteration)
                if label:
                    states = state.ctx.circuit.forward(state.theta)
                    cache = state.player.prepare(states[-1])
            player, circuit = state.player, state.ctx.circuit
            for _ in range(config.disc_steps_per_iter):
                optimizer_step(state, player.gradient(states[-1], cache), "DISCRIMINATOR")
            for _ in range(config.gen_steps_per_iter):
                lam = player.cotangent(states[-1], cache)
                optimizer_step(state, -circuit.backward(state.theta, states, lam), "GENERATOR")
                states = circuit.forward(state.theta)
                cache = player.prepare(states[-1])
            state.iteration += 1
            f = measure(states[-1], cache, "")
        if f >= config.fidelity_threshold:
            record.stop_iteration = state.iteration
    except TrainingAborted as exc:
        record.aborted = True
        record.abort_reason = str(exc)
        _finalize(record, state)
        log.warning("run with seed %d aborted: %s", config.seed, exc)
        raise TrainingAborted(str(exc), record) from exc
    _finalize(record, state)
    return record


def _finalize(record: RunRecord, state: TrainState) -> None:
    record.final_theta = [float(x) for x in state.theta]
    record.final_phi = [float(x) for x in state.phi]
    record.final_ancilla = state.spec.ancilla.value
