"""
Two interchangeable representations of the discriminator during training.

``WeightPlayer`` stores the weight vector and evaluates every term by a
gather from the generator matrix. ``OperatorPlayer`` stores the dense
observable ``D(phi)`` instead. When every Pauli string is a term and the
ascent is a plain gradient step, both follow the same trajectory because

    sum_k (<P_k>_T - <P_k>_G) P_k = 2^n (rho_T - rho_G),
    ||phi||_2 = ||D||_F / sqrt(2^n),

and the dense form only needs a few matrix-vector products per step,
however many strings there are.
"""

from __future__ import annotations

import numpy as np

from .discriminator import GameContext, build_discriminator, carry_weights, operator_to_weights, weights_to_operator
from .optim import Adam, SGD, project_weights


class WeightPlayer:
    dense = False

    def __init__(self, ctx: GameContext, phi: np.ndarray, optimizer, clip_mode: str = "l2"):
        self.ctx = ctx
        self.optimizer = optimizer
        self.clip_mode = clip_mode
        self._phi = np.asarray(phi, dtype=float)

    @property
    def phi(self) -> np.ndarray:
        return self._phi

    @phi.setter
    def phi(self, value: np.ndarray) -> None:
        self._phi = np.asarray(value, dtype=float)

    def prepare(self, k: np.ndarray) -> np.ndarray:
        return self.ctx.observables.terms_applied(k)

    def gradient(self, k: np.ndarray, cache) -> np.ndarray:
        return self.ctx.e_target - self.ctx.observables.expectations(k, cache)

    def ascend(self, grad: np.ndarray) -> None:
        phi = self.optimizer.step(self._phi, grad, ascend=True)
        self._phi = project_weights(phi, self.ctx.disc.clip_bound, self.clip_mode)

    def score(self, k: np.ndarray, cache) -> float:
        return float(np.dot(self._phi, self.gradient(k, cache)))

    def cotangent(self, k: np.ndarray, cache) -> np.ndarray:
        return self.ctx.observables.cotangent(k, self._phi, cache)

    def extend(self, ctx: GameContext) -> None:
        """Move onto ``ctx``, whose discriminator has one extra trailing qubit."""
        old, new = self.ctx.disc, ctx.disc
        index = new.index()
        self.optimizer.remap(new.n_terms, np.array([index[t.letters + "I"] for t in old.terms]))
        self._phi = carry_weights(old, self._phi, new)
        self.ctx = ctx


class OperatorPlayer:
    """Dense-observable form; valid for a complete term set, plain ascent and l2 clipping."""

    dense = True

    def __init__(self, ctx: GameContext, phi: np.ndarray, optimizer: SGD):
        if not ctx.disc.is_complete:
            raise ValueError("dense discriminator needs every Pauli string as a term")
        self.ctx = ctx
        self.optimizer = optimizer
        self.clip_mode = "l2"
        self.op = weights_to_operator(ctx.disc, phi)
        self._rho_target = np.outer(ctx.psi_target, ctx.psi_target.conj())

    @property
    def phi(self) -> np.ndarray:
        return operator_to_weights(self.ctx.disc, self.op)

    @phi.setter
    def phi(self, value: np.ndarray) -> None:
        self.op = weights_to_operator(self.ctx.disc, value)

    def prepare(self, k: np.ndarray) -> np.ndarray:
        return self.ctx.choi_vector(k)

    def gradient(self, k: np.ndarray, psi: np.ndarray) -> np.ndarray:
        """The ascent direction as an operator, ``sum_k g_k P_k``."""
        return len(psi) * (self._rho_target - np.outer(psi, psi.conj()))

    def ascend(self, grad: np.ndarray) -> None:
        if grad.ndim == 1:
            grad = weights_to_operator(self.ctx.disc, grad)
        op = self.optimizer.step(self.op, grad, ascend=True)
        norm = np.linalg.norm(op) / np.sqrt(op.shape[0])
        bound = self.ctx.disc.clip_bound
        self.op = op * (bound / norm) if norm > bound else op

    def score(self, k: np.ndarray, psi: np.ndarray) -> float:
        psi_t = self.ctx.psi_target
        return float(np.vdot(psi_t, self.op @ psi_t).real - np.vdot(psi, self.op @ psi).real)

    def cotangent(self, k: np.ndarray, psi: np.ndarray) -> np.ndarray:
        d = k.shape[1]
        return (self.op @ psi).reshape(d, -1).T / np.sqrt(d)

    def extend(self, ctx: GameContext) -> None:
        # strings padded with I on the new ancilla keep their weights
        self.op = np.kron(self.op, np.eye(2))
        self.ctx = ctx
        self._rho_target = np.outer(ctx.psi_target, ctx.psi_target.conj())


def make_player(ctx: GameContext, phi: np.ndarray, optimizer: str, lr: float, clip_mode: str, dense: bool = True):
    """Pick the dense form whenever it is exact, the weight form otherwise."""
    if optimizer == "sgd":
        opt = SGD(lr)
    elif optimizer == "adam":
        opt = Adam(ctx.disc.n_terms, lr=lr)
    else:
        raise ValueError(f"unknown discriminator optimizer {optimizer!r}")
    if dense and optimizer == "sgd" and clip_mode == "l2" and ctx.disc.is_complete:
        return OperatorPlayer(ctx, phi, opt)
    return WeightPlayer(ctx, phi, opt, clip_mode)


def extended_discriminator(disc):
    """Discriminator for one extra (ancilla) qubit with the same weight rule."""
    return build_discriminator(disc.n_qubits + 1, None if disc.is_complete else disc.max_weight, disc.clip_bound)
