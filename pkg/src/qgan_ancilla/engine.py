"""
Fused evaluation of RX/RZ/RZZ circuits with reverse-mode gradients.

Consecutive RX gates commute with one another (they are all diagonal in
the Hadamard basis) and consecutive RZ/RZZ gates are all diagonal in the
computational basis, so a circuit collapses into alternating blocks
``H D_x H`` and ``D_z``. Each block costs one phase vector and at most two
small matrix products, which keeps the training loop cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sim import ContractError, hadamard_transform, rotation_generator_signs


@dataclass(frozen=True)
class _Block:
    hadamard: bool
    slots: np.ndarray
    signs: np.ndarray  # (len(slots), 2**n)


class FusedCircuit:
    """Compiled form of a generator spec acting on a set of input columns."""

    def __init__(self, spec, columns: np.ndarray | None = None):
        self.n_qubits = spec.n_qubits
        self.n_params = spec.n_params
        self.dim = 2**self.n_qubits
        cols = np.arange(self.dim) if columns is None else np.asarray(columns)
        self.inputs = np.eye(self.dim, dtype=complex)[:, cols]
        self._h = hadamard_transform(self.n_qubits).astype(complex)

        blocks: list[_Block] = []
        run: list = []
        for gate in spec.gates:
            if run and (gate.kind == "RX") != (run[-1].kind == "RX"):
                blocks.append(self._make_block(run))
                run = []
            run.append(gate)
        if run:
            blocks.append(self._make_block(run))
        self.blocks = tuple(blocks)

    def _make_block(self, gates) -> _Block:
        return _Block(
            hadamard=gates[0].kind == "RX",
            slots=np.array([g.slot for g in gates], dtype=int),
            signs=np.array([rotation_generator_signs(self.n_qubits, g.kind, g.qubits) for g in gates]),
        )

    def _phase(self, block: _Block, params: np.ndarray) -> np.ndarray:
        return np.exp(-0.5j * (params[block.slots] @ block.signs))

    def forward(self, params: np.ndarray) -> list[np.ndarray]:
        """States after every block; the last entry is ``U[:, columns]``."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ContractError(f"expected {self.n_params} parameters, got shape {params.shape}")
        h = self._h
        rho = self.inputs
        states = [rho]
        for block in self.blocks:
            phase = self._phase(block, params)[:, None]
            rho = h @ (phase * (h @ rho)) if block.hadamard else phase * rho
            states.append(rho)
        return states

    def output(self, params: np.ndarray) -> np.ndarray:
        return self.forward(params)[-1]

    def backward(self, params: np.ndarray, states: list[np.ndarray], cotangent: np.ndarray) -> np.ndarray:
        """Gradient of ``2 Re Tr(cotangent^dagger K(params))``.

        ``states`` must come from :meth:`forward` at the same ``params``.
        """
        params = np.asarray(params, dtype=float)
        h = self._h
        lam = cotangent
        grad = np.zeros(self.n_params)
        for b in range(len(self.blocks) - 1, -1, -1):
            block = self.blocks[b]
            rho = states[b + 1]
            phase = self._phase(block, params).conj()[:, None]
            if block.hadamard:
                lam_h = h @ lam
                w = np.einsum("ij,ij->i", lam_h.conj(), h @ rho)
                lam = h @ (phase * lam_h)
            else:
                w = np.einsum("ij,ij->i", lam.conj(), rho)
                lam = phase * lam
            np.add.at(grad, block.slots, block.signs @ w.imag)
        return grad
