"""
Layered generator circuits with optional ancilla connectivity.

Each layer applies RX on every qubit, then RZ on every qubit, then RZZ on
the nearest-neighbour system pairs, then the ancilla couplings of the
chosen configuration. Qubits are 0-indexed; the ancilla is qubit
``n_system_qubits`` (the last, least significant one).

Ancilla configurations (per layer):

====  ==================  ========================
name  ancilla rotations   ancilla RZZ partners
====  ==================  ========================
A1    RX, RZ              last system qubit
A2    none                last, first
A3    RX, RZ              last, first
A4    RX, RZ              last, first, middle
====  ==================  ========================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .sim import ContractError


class AncillaConfig(str, enum.Enum):
    NONE = "NONE"
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"


class InitMode(str, enum.Enum):
    RANDOM = "RANDOM"
    ZERO = "ZERO"


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    slot: int
    layer: int

    @property
    def key(self) -> tuple:
        """Identity of the gate independent of its parameter slot."""
        return (self.layer, self.kind, self.qubits)


@dataclass(frozen=True)
class GeneratorSpec:
    n_system_qubits: int
    n_layers: int
    ancilla: AncillaConfig
    gates: tuple[Gate, ...]

    @property
    def has_ancilla(self) -> bool:
        return self.ancilla is not AncillaConfig.NONE

    @property
    def n_qubits(self) -> int:
        return self.n_system_qubits + int(self.has_ancilla)

    @property
    def n_params(self) -> int:
        return len(self.gates)

    def slot_map(self) -> dict[tuple, int]:
        return {g.key: g.slot for g in self.gates}

    def to_dict(self) -> dict:
        return {
            "n_system_qubits": self.n_system_qubits,
            "n_layers": self.n_layers,
            "ancilla": self.ancilla.value,
            "gates": [
                {"kind": g.kind, "qubits": list(g.qubits), "slot": g.slot, "layer": g.layer}
                for g in self.gates
            ],
        }


def ancilla_partners(n_system_qubits: int, config: AncillaConfig) -> tuple[int, ...]:
    last, first, middle = n_system_qubits - 1, 0, n_system_qubits // 2
    return {
        AncillaConfig.NONE: (),
        AncillaConfig.A1: (last,),
        AncillaConfig.A2: (last, first),
        AncillaConfig.A3: (last, first),
        AncillaConfig.A4: (last, first, middle),
    }[config]


def ancilla_has_rotations(config: AncillaConfig) -> bool:
    return config in (AncillaConfig.A1, AncillaConfig.A3, AncillaConfig.A4)


def params_per_layer(n_system_qubits: int, config: AncillaConfig) -> int:
    local = n_system_qubits + int(ancilla_has_rotations(config))
    return 2 * local + (n_system_qubits - 1) + len(ancilla_partners(n_system_qubits, config))


def build_generator_spec(n_qubits: int, n_layers: int, config: AncillaConfig | str = AncillaConfig.NONE) -> GeneratorSpec:
    config = AncillaConfig(config)
    if n_qubits < 2 or n_layers < 1:
        raise ContractError("need at least 2 system qubits and 1 layer")
    if config is not AncillaConfig.NONE and n_qubits < 3:
        raise ContractError(f"ancilla configuration {config.value} needs at least 3 system qubits")
    anc = n_qubits
    local = list(range(n_qubits)) + ([anc] if ancilla_has_rotations(config) else [])
    gates: list[Gate] = []

    def add(kind, qubits, layer):
        gates.append(Gate(kind, tuple(qubits), len(gates), layer))

    for layer in range(n_layers):
        for q in local:
            add("RX", (q,), layer)
        for q in local:
            add("RZ", (q,), layer)
        for q in range(n_qubits - 1):
            add("RZZ", (q, q + 1), layer)
        for q in ancilla_partners(n_qubits, config):
            add("RZZ", (q, anc), layer)
    return GeneratorSpec(n_qubits, n_layers, config, tuple(gates))


def init_params(spec: GeneratorSpec, mode: InitMode | str, rng: np.random.Generator) -> np.ndarray:
    """Uniform on [0, 2*pi) for RANDOM, zeros for ZERO."""
    return init_params_like(spec.n_params, mode, rng)


def embed_params(old: GeneratorSpec, params: np.ndarray, new: GeneratorSpec, fill: np.ndarray | float = 0.0):
    """Carry parameter values from ``old`` slots into the matching ``new`` slots.

    Returns ``(new_params, new_slot_mask)``; slots with no counterpart in
    ``old`` take values from ``fill``.
    """
    new_map = new.slot_map()
    out = np.empty(new.n_params)
    out[:] = fill
    mask = np.ones(new.n_params, dtype=bool)
    for g in old.gates:
        try:
            slot = new_map[g.key]
        except KeyError:
            raise ContractError(f"gate {g.key} has no counterpart in the target circuit") from None
        out[slot] = params[g.slot]
        mask[slot] = False
    return out, mask


def extend_with_ancilla(
    spec: GeneratorSpec,
    params: np.ndarray,
    config: AncillaConfig | str,
    init_mode: InitMode | str,
    rng: np.random.Generator,
) -> tuple[GeneratorSpec, np.ndarray]:
    config = AncillaConfig(config)
    if spec.has_ancilla:
        raise ContractError("circuit already has an ancilla")
    if config is AncillaConfig.NONE:
        raise ContractError("extend_with_ancilla needs an ancilla configuration")
    new = build_generator_spec(spec.n_system_qubits, spec.n_layers, config)
    new_params, mask = embed_params(spec, np.asarray(params, dtype=float), new)
    new_params[mask] = init_params_like(int(mask.sum()), init_mode, rng)
    return new, new_params


def init_params_like(count: int, mode: InitMode | str, rng: np.random.Generator) -> np.ndarray:
    if InitMode(mode) is InitMode.ZERO:
        return np.zeros(count)
    return rng.uniform(0.0, 2 * math.pi, size=count)
