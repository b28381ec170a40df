"""
Fast conversion between dense operators and Pauli-basis coefficients.

Coefficients are indexed by base-4 digits (I=0, X=1, Y=2, Z=3), qubit 0
being the most significant digit. Both directions cost ``O(n 4^n)``.
"""

from __future__ import annotations

import numpy as np

from .sim import num_qubits

_LETTER = {"I": 0, "X": 1, "Y": 2, "Z": 3}

def pauli_index(letters: str) -> int:
    idx = 0
    for ch in letters:
        idx = 4 * idx + _LETTER[ch]
    return idx


def _interleave(n: int) -> list[int]:
    return [ax for q in range(n) for ax in (q, n + q)]


def _to_pauli_stage(t: np.ndarray) -> np.ndarray:
    # (m00, m01, m10, m11) -> (Tr I m, Tr X m, Tr Y m, Tr Z m)
    m00, m01, m10, m11 = t[:, 0], t[:, 1], t[:, 2], t[:, 3]
    out = np.empty_like(t)
    out[:, 0] = m00 + m11
    out[:, 1] = m01 + m10
    out[:, 2] = 1j * (m01 - m10)
    out[:, 3] = m00 - m11
    return out


def _from_pauli_stage(t: np.ndarray) -> np.ndarray:
    # (c_I, c_X, c_Y, c_Z) -> (m00, m01, m10, m11) of sum_P c_P P
    ci, cx, cy, cz = t[:, 0], t[:, 1], t[:, 2], t[:, 3]
    out = np.empty_like(t)
    out[:, 0] = ci + cz
    out[:, 1] = cx - 1j * cy
    out[:, 2] = cx + 1j * cy
    out[:, 3] = ci - cz
    return out


def _apply_each_qubit(t: np.ndarray, stage, n: int) -> np.ndarray:
    for q in range(n):
        t = stage(t.reshape(4**q, 4, 4 ** (n - q - 1)))
    return t.reshape(-1)


def pauli_coefficients(m: np.ndarray) -> np.ndarray:
    """``Tr(P m)`` for every Pauli string ``P``."""
    n = num_qubits(m.shape[0])
    t = np.asarray(m, dtype=complex).reshape((2,) * (2 * n)).transpose(_interleave(n))
    return _apply_each_qubit(np.ascontiguousarray(t), _to_pauli_stage, n)


def operator_from_coefficients(coeffs: np.ndarray) -> np.ndarray:
    """Dense ``sum_P c_P P`` from a full length-``4**n`` coefficient vector."""
    n = (int(coeffs.size).bit_length() - 1) // 2
    t = _apply_each_qubit(np.asarray(coeffs, dtype=complex), _from_pauli_stage, n)
    inverse = np.argsort(_interleave(n))
    t = t.reshape((2,) * (2 * n)).transpose(inverse)
    return np.ascontiguousarray(t).reshape(2**n, 2**n)
