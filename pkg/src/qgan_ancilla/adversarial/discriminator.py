"""
Pauli-sum discriminator and the loss it induces on Choi output states.

The discriminator is ``D(phi) = sum_k phi_k P_k`` over every Pauli string of
weight 1..max_weight on the full Choi output register (all non-identity
strings when ``max_weight`` is the register size), and the game value is

    L(theta, phi) = sum_k phi_k (<psi_T|P_k|psi_T> - <psi_G|P_k|psi_G>).

Expectations are evaluated in the unitary picture. Writing a Choi output as
``psi[i, j] = K[j, i] / sqrt(d)`` with ``K`` the generator (or target) matrix
restricted to its input columns, a term ``P_A (x) Q_B`` has

    <psi|P_A (x) Q_B|psi> = Tr(K^dagger Q_B K P_A^T) / d,

so nothing larger than the system+ancilla unitary is ever formed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from ..engine import FusedCircuit
from ..pauli_transform import operator_from_coefficients, pauli_coefficients, pauli_index
from ..sim import ContractError, PauliString, fidelity_hs


@dataclass(frozen=True)
class DiscriminatorSpec:
    n_qubits: int
    terms: tuple[PauliString, ...]
    max_weight: int = 2
    clip_bound: float = 1.0

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def is_complete(self) -> bool:
        """True when every non-identity string is a term."""
        return self.max_weight >= self.n_qubits

    def index(self) -> dict[str, int]:
        return {str(p): k for k, p in enumerate(self.terms)}

    def pauli_order(self) -> np.ndarray:
        """Position of each term in the base-4 coefficient layout."""
        return np.array([pauli_index(t.letters) for t in self.terms], dtype=int)


def count_terms(n_qubits: int, max_weight: int | None) -> int:
    top = n_qubits if max_weight is None else min(max_weight, n_qubits)
    return sum(comb(n_qubits, w) * 3**w for w in range(1, top + 1))


def build_discriminator(n_qubits: int, max_weight: int | None = 2, clip_bound: float = 1.0) -> DiscriminatorSpec:
    """Terms sorted by weight, then support, then letters. ``max_weight=None`` keeps every string."""
    if max_weight is None:
        max_weight = n_qubits
    if max_weight < 1:
        raise ContractError("max_weight must be at least 1")
    max_weight = min(max_weight, n_qubits)
    if clip_bound <= 0:
        raise ContractError("clip_bound must be positive")
    terms = []
    for w in range(1, max_weight + 1):
        for support in itertools.combinations(range(n_qubits), w):
            for letters in itertools.product("XYZ", repeat=w):
                chars = ["I"] * n_qubits
                for q, ch in zip(support, letters):
                    chars[q] = ch
                terms.append(PauliString("".join(chars)))
    return DiscriminatorSpec(n_qubits, tuple(terms), max_weight, clip_bound)


def carry_weights(old: DiscriminatorSpec, phi: np.ndarray, new: DiscriminatorSpec) -> np.ndarray:
    """Map weights onto a discriminator with one extra (last) qubit.

    Strings that survive (old string padded with ``I``) keep their weight;
    everything else starts at zero.
    """
    index = new.index()
    out = np.zeros(new.n_terms)
    pad = "I" * (new.n_qubits - old.n_qubits)
    for k, term in enumerate(old.terms):
        out[index[term.letters + pad]] = phi[k]
    return out


def weights_to_operator(disc: DiscriminatorSpec, phi: np.ndarray) -> np.ndarray:
    coeffs = np.zeros(4**disc.n_qubits, dtype=complex)
    coeffs[disc.pauli_order()] = phi
    return operator_from_coefficients(coeffs)


def operator_to_weights(disc: DiscriminatorSpec, op: np.ndarray) -> np.ndarray:
    """Inverse of :func:`weights_to_operator` for operators in the span of the terms."""
    return pauli_coefficients(op)[disc.pauli_order()].real / 2**disc.n_qubits


def _monomial(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column index and value of the single nonzero in each row of a Pauli matrix."""
    cols = np.argmax(np.abs(matrix), axis=1)
    return cols, matrix[np.arange(len(cols)), cols]


class ChoiObservables:
    """Evaluates all discriminator expectations for Choi-form matrices ``K``.

    Pauli matrices are monomial, so for a term ``P_A (x) Q_B``

        (Q_B K P_A^T)[i, j] = q(i) p(j) K[pi(i), sigma(j)],

    where ``Q_B[i, pi(i)] = q(i)`` and ``P_A[j, sigma(j)] = p(j)``. Every term
    is therefore one gather from ``K`` times a fixed phase pattern.
    """

    def __init__(self, disc: DiscriminatorSpec, n_system_qubits: int):
        n_a = n_system_qubits
        if disc.n_qubits <= n_a:
            raise ContractError("discriminator must cover the A register and the system")
        self.d = 2**n_a
        rows, cols, phases = [], [], []
        for term in disc.terms:
            pi, q = _monomial(PauliString(term.letters[n_a:]).matrix())
            sigma, p = _monomial(PauliString(term.letters[:n_a]).matrix())
            rows.append(pi)
            cols.append(sigma)
            phases.append(np.outer(q, p))
        rows = np.array(rows)[:, :, None]
        cols = np.array(cols)[:, None, :]
        self.flat_index = (rows * self.d + cols).reshape(len(disc.terms), -1)
        self.phases = np.array(phases).reshape(len(disc.terms), -1)

    def terms_applied(self, k: np.ndarray) -> np.ndarray:
        """Rows hold ``Q_t K P_t^T`` (flattened) for every term ``t``."""
        return self.phases * np.take(k, self.flat_index)

    def expectations(self, k: np.ndarray, applied: np.ndarray | None = None) -> np.ndarray:
        if applied is None:
            applied = self.terms_applied(k)
        return (applied @ k.conj().ravel()).real / self.d

    def cotangent(self, k: np.ndarray, phi: np.ndarray, applied: np.ndarray | None = None) -> np.ndarray:
        """``Lambda`` such that ``<psi_G|D(phi)|psi_G> = Re Tr(K^dagger Lambda)``."""
        if applied is None:
            applied = self.terms_applied(k)
        return (phi @ applied).reshape(k.shape) / self.d


class GameContext:
    """Everything fixed while (theta, phi) are trained: target, circuit, discriminator."""

    def __init__(self, spec, target: np.ndarray, disc: DiscriminatorSpec):
        target = np.asarray(target, dtype=complex)
        self.spec = spec
        self.disc = disc
        self.target = target
        self.n_system = spec.n_system_qubits
        self.ancilla = spec.has_ancilla
        if target.shape != (2**self.n_system,) * 2:
            raise ContractError(f"target shape {target.shape} does not match {self.n_system} system qubits")
        if disc.n_qubits != 2 * self.n_system + int(self.ancilla):
            raise ContractError(
                f"discriminator acts on {disc.n_qubits} qubits, expected {2 * self.n_system + int(self.ancilla)}"
            )
        dim = 2**spec.n_qubits
        columns = np.arange(0, dim, 2) if self.ancilla else np.arange(dim)
        self.circuit = FusedCircuit(spec, columns)
        # untouched ancilla line on the target side
        self.k_target = np.kron(target, np.eye(2)[:, :1]) if self.ancilla else target

    @cached_property
    def observables(self) -> ChoiObservables:
        return ChoiObservables(self.disc, self.n_system)

    @cached_property
    def e_target(self) -> np.ndarray:
        return self.observables.expectations(self.k_target)

    def choi_vector(self, k: np.ndarray) -> np.ndarray:
        """Choi output state for a (restricted) unitary ``k``."""
        return k.T.reshape(-1) / np.sqrt(k.shape[1])

    @cached_property
    def psi_target(self) -> np.ndarray:
        return self.choi_vector(self.k_target)

    def kept_block(self, k: np.ndarray) -> np.ndarray:
        return k[0::2] if self.ancilla else k

    def fidelity_from_output(self, k: np.ndarray) -> float:
        return fidelity_hs(self.kept_block(k), self.target)

    def check(self, theta: np.ndarray | None = None, phi: np.ndarray | None = None) -> None:
        if theta is not None and np.shape(theta) != (self.spec.n_params,):
            raise ContractError(f"theta has shape {np.shape(theta)}, expected ({self.spec.n_params},)")
        if phi is not None and np.shape(phi) != (self.disc.n_terms,):
            raise ContractError(f"phi has shape {np.shape(phi)}, expected ({self.disc.n_terms},)")


def loss_value(theta: np.ndarray, phi: np.ndarray, ctx: GameContext) -> float:
    ctx.check(theta, phi)
    k = ctx.circuit.output(theta)
    return float(np.dot(phi, ctx.e_target - ctx.observables.expectations(k)))


def grad_discriminator(theta: np.ndarray, phi: np.ndarray | None, ctx: GameContext) -> np.ndarray:
    """``dL/dphi``; exact since the loss is linear in ``phi``."""
    ctx.check(theta, phi)
    k = ctx.circuit.output(theta)
    return ctx.e_target - ctx.observables.expectations(k)


def grad_generator(theta: np.ndarray, phi: np.ndarray, ctx: GameContext, method: str = "adjoint") -> np.ndarray:
    """``dL/dtheta`` by reverse-mode sweep (``adjoint``) or two-point ``shift`` rule."""
    ctx.check(theta, phi)
    theta = np.asarray(theta, dtype=float)
    if method == "adjoint":
        states = ctx.circuit.forward(theta)
        lam = ctx.observables.cotangent(states[-1], np.asarray(phi, dtype=float))
        return -ctx.circuit.backward(theta, states, lam)
    if method == "shift":
        grad = np.empty_like(theta)
        for k in range(theta.size):
            shift = np.zeros_like(theta)
            shift[k] = np.pi / 2
            grad[k] = 0.5 * (loss_value(theta + shift, phi, ctx) - loss_value(theta - shift, phi, ctx))
        return grad
    raise ValueError(f"unknown gradient method {method!r}")


def generator_fidelity(theta: np.ndarray, ctx: GameContext) -> float:
    ctx.check(theta)
    return ctx.fidelity_from_output(ctx.circuit.output(theta))


def dense_observable(disc: DiscriminatorSpec, phi: np.ndarray) -> np.ndarray:
    """Dense ``sum_k phi_k P_k``; slow, for cross-checks only."""
    dim = 2**disc.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for w, term in zip(phi, disc.terms):
        out += w * term.matrix()
    return out


__all__ = [
    "DiscriminatorSpec",
    "build_discriminator",
    "carry_weights",
    "count_terms",
    "weights_to_operator",
    "operator_to_weights",
    "ChoiObservables",
    "GameContext",
    "loss_value",
    "grad_discriminator",
    "grad_generator",
    "generator_fidelity",
    "dense_observable",
]
