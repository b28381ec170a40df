"""
Dense statevector / unitary simulation for small qubit registers.

Conventions used throughout the package:

- qubit 0 is the most significant bit of a basis index;
- rotations are ``exp(-i * angle / 2 * P)`` for a Pauli string ``P``;
- Choi output states place register A on the most significant qubits, then
  the system register B, then (optionally) the ancilla as the least
  significant qubit.

States are plain complex numpy arrays whose first axis has length ``2**n``.
Trailing axes are carried along, so a ``(2**n, m)`` matrix is treated as a
batch of ``m`` column states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}

ROTATION_KINDS = ("RX", "RZ", "RZZ")


class ContractError(ValueError):
    """Raised when arguments violate an operation's shape/size contract."""


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ContractError(f"dimension {dim} is not a power of two")
    return n


def basis_state(n_qubits: int, index: int = 0) -> np.ndarray:
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


@lru_cache(maxsize=None)
def z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    """Eigenvalues (+1/-1) of ``Z_qubit`` on every computational basis state."""
    bits = (np.arange(2**n_qubits) >> (n_qubits - 1 - qubit)) & 1
    out = 1.0 - 2.0 * bits
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def hadamard_transform(n_qubits: int) -> np.ndarray:
    """Normalised ``H^{(x)n}``; real, symmetric and involutive."""
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    out = np.ones((1, 1))
    for _ in range(n_qubits):
        out = np.kron(out, h)
    out.flags.writeable = False
    return out


def _check_qubits(n: int, kind: str, qubits: Sequence[int]) -> tuple[int, ...]:
    qubits = tuple(int(q) for q in qubits)
    arity = 2 if kind == "RZZ" else 1
    if kind not in ROTATION_KINDS:
        raise ContractError(f"unknown rotation kind {kind!r}")
    if len(qubits) != arity:
        raise ContractError(f"{kind} acts on {arity} qubit(s), got {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit index {q} out of range for {n} qubits")
    if len(set(qubits)) != len(qubits):
        raise IndexError(f"duplicate qubit index in {qubits}")
    return qubits


def rotation_generator_signs(n_qubits: int, kind: str, qubits: Sequence[int]) -> np.ndarray:
    """Diagonal of the rotation generator in its eigenbasis.

    For RZ/RZZ this is the computational basis; for RX it is the Hadamard
    basis, i.e. ``X_q = H Z_q H``.
    """
    qubits = _check_qubits(n_qubits, kind, qubits)
    s = np.ones(2**n_qubits)
    for q in qubits:
        s = s * z_signs(n_qubits, q)
    return s


def apply_rotation(state: np.ndarray, kind: str, qubits: Sequence[int], angle: float) -> np.ndarray:
    """Apply ``exp(-i angle/2 P)`` with ``P`` in {X_q, Z_q, Z_q Z_r}.

    Returns a new array; the input is not modified.
    """
    state = np.asarray(state, dtype=complex)
    n = num_qubits(state.shape[0])
    qubits = _check_qubits(n, kind, qubits)
    tail = state.shape[1:]
    if kind == "RX":
        (q,) = qubits
        c, s = np.cos(angle / 2), np.sin(angle / 2)
        t = state.reshape((2**q, 2, 2 ** (n - q - 1)) + tail)
        out = np.empty_like(t)
        out[:, 0] = c * t[:, 0] - 1j * s * t[:, 1]
        out[:, 1] = c * t[:, 1] - 1j * s * t[:, 0]
        return out.reshape(state.shape)
    signs = rotation_generator_signs(n, kind, qubits)
    phase = np.exp(-0.5j * angle * signs)
    return phase.reshape((-1,) + (1,) * len(tail)) * state


def rotation_matrix(n_qubits: int, kind: str, qubits: Sequence[int], angle: float) -> np.ndarray:
    return apply_rotation(np.eye(2**n_qubits, dtype=complex), kind, qubits, angle)


def apply_generator(state: np.ndarray, kind: str, qubits: Sequence[int]) -> np.ndarray:
    """Apply the (Hermitian) Pauli generator of a rotation, without the angle."""
    state = np.asarray(state, dtype=complex)
    n = num_qubits(state.shape[0])
    qubits = _check_qubits(n, kind, qubits)
    if kind == "RX":
        (q,) = qubits
        t = state.reshape((2**q, 2, 2 ** (n - q - 1)) + state.shape[1:])
        return t[:, ::-1].reshape(state.shape).copy()
    signs = rotation_generator_signs(n, kind, qubits)
    return signs.reshape((-1,) + (1,) * (state.ndim - 1)) * state


# ---------------------------------------------------------------------------
# Pauli strings


@dataclass(frozen=True, order=True)
class PauliString:
    letters: str

    def __post_init__(self):
        if not self.letters or set(self.letters) - set("IXYZ"):
            raise ContractError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(ch != "I" for ch in self.letters)

    def __str__(self) -> str:
        return self.letters

    def matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for ch in self.letters:
            out = np.kron(out, PAULI_MATRICES[ch])
        return out

    def apply(self, state: np.ndarray) -> np.ndarray:
        """``P @ state`` without building the dense matrix."""
        state = np.asarray(state, dtype=complex)
        n = num_qubits(state.shape[0])
        if n != self.n_qubits:
            raise ContractError(f"{self.letters} acts on {self.n_qubits} qubits, state has {n}")
        tail = state.shape[1:]
        t = state.reshape((2,) * n + tail)
        for q, ch in enumerate(self.letters):
            if ch == "I":
                continue
            t = np.moveaxis(t, q, 0)
            if ch == "X":
                t = t[::-1]
            elif ch == "Z":
                t = np.stack([t[0], -t[1]])
            else:  # Y|0> = i|1>, Y|1> = -i|0>
                t = np.stack([-1j * t[1], 1j * t[0]])
            t = np.moveaxis(t, 0, q)
        return np.ascontiguousarray(t).reshape(state.shape)


def pauli_expectation(state: np.ndarray, terms: Iterable[tuple[float, PauliString]]) -> float:
    """Return ``sum_k c_k <psi|P_k|psi>`` for a pure state."""
    state = np.asarray(state, dtype=complex)
    n = num_qubits(state.shape[0])
    total = 0.0
    for coeff, pauli in terms:
        if pauli.n_qubits != n:
            raise ContractError(f"term {pauli} does not match a {n}-qubit state")
        total += coeff * np.vdot(state, pauli.apply(state)).real
    return float(total)


# ---------------------------------------------------------------------------
# Unitaries, Choi states and fidelities


def circuit_unitary(spec, params) -> np.ndarray:
    """Dense unitary of a generator circuit, built gate by gate.

    ``spec`` is anything with ``n_qubits``, ``n_params`` and ``gates`` (a
    sequence of objects with ``kind``, ``qubits`` and ``slot``).
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.n_params,):
        raise ContractError(f"expected {spec.n_params} parameters, got shape {params.shape}")
    u = np.eye(2**spec.n_qubits, dtype=complex)
    for gate in spec.gates:
        u = apply_rotation(u, gate.kind, gate.qubits, params[gate.slot])
    return u


def target_unitary_zzz(t: float = 1.0) -> np.ndarray:
    """``exp(-i t Z1 Z2 Z3)`` on three qubits (diagonal)."""
    parity = z_signs(3, 0) * z_signs(3, 1) * z_signs(3, 2)
    return np.diag(np.exp(-1j * t * parity))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    # QR of a Ginibre matrix with the phase fix of Mezzadri.
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def choi_output_state(u: np.ndarray, ancilla: bool = False) -> np.ndarray:
    """Return ``(I_A (x) U)|Omega>`` or, with ``ancilla``, ``(I_A (x) U_Ga)|Omega>|0>_a``.

    The amplitude of ``|i>_A |j>_B`` is ``U[j, i] / sqrt(d)``; with an
    ancilla the B-side input column is ``2 i`` (ancilla in ``|0>``).
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ContractError("unitary must be square")
    dim = u.shape[0]
    num_qubits(dim)
    if ancilla:
        if dim < 4:
            raise ContractError("ancilla-extended unitary needs at least 2 qubits")
        d = dim // 2
        cols = u[:, 0::2]
    else:
        d = dim
        cols = u
    return (cols.T / np.sqrt(d)).reshape(-1)


def fidelity_hs(u_g: np.ndarray, u_t: np.ndarray) -> float:
    """``|Tr(U_G^dagger U_T)|^2 / d^2``."""
    u_g = np.asarray(u_g)
    u_t = np.asarray(u_t)
    if u_g.shape != u_t.shape or u_g.ndim != 2:
        raise ContractError(f"shape mismatch: {u_g.shape} vs {u_t.shape}")
    d = u_t.shape[0]
    return float(abs(np.vdot(u_g, u_t)) ** 2 / d**2)


@dataclass(frozen=True)
class AncillaBlockDecomposition:
    kept_block: np.ndarray
    discarded_block: np.ndarray
    off_block_norm: float


def project_ancilla_block(u_ga: np.ndarray) -> AncillaBlockDecomposition:
    """Split a system+ancilla unitary by the ancilla (least significant) qubit."""
    u_ga = np.asarray(u_ga, dtype=complex)
    dim = u_ga.shape[0]
    if u_ga.ndim != 2 or u_ga.shape[1] != dim or dim < 2 or dim % 2:
        raise ContractError(f"expected an even square matrix, got shape {u_ga.shape}")
    off = np.sqrt(np.linalg.norm(u_ga[0::2, 1::2]) ** 2 + np.linalg.norm(u_ga[1::2, 0::2]) ** 2)
    return AncillaBlockDecomposition(
        kept_block=u_ga[0::2, 0::2].copy(),
        discarded_block=u_ga[1::2, 1::2].copy(),
        off_block_norm=float(off),
    )


def projected_fidelity(u_ga: np.ndarray, u_t: np.ndarray) -> float:
    return fidelity_hs(project_ancilla_block(u_ga).kept_block, u_t)
