"""
Jacobian rank of the generator's output state with respect to its angles.

Column ``k`` of the Jacobian is the state obtained by inserting
``-i/2 * P_k`` right after gate ``k``, where ``P_k`` is that gate's Pauli
generator. Ranks are taken over the reals (real and imaginary parts
stacked), which is the usual convention for counting independent state
directions.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AncillaConfig, GeneratorSpec, build_generator_spec, embed_params
from .sim import ContractError, apply_generator, apply_rotation, basis_state, rotation_matrix


def state_jacobian(spec: GeneratorSpec, theta: np.ndarray) -> np.ndarray:
    """``(2**n, n_params)`` complex matrix of ``d C(theta)|0...0> / d theta_k``."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ContractError(f"expected {spec.n_params} parameters, got shape {theta.shape}")
    n = spec.n_qubits
    psi = basis_state(n)
    after = []
    for g in spec.gates:
        psi = apply_rotation(psi, g.kind, g.qubits, theta[g.slot])
        after.append(psi)
    jac = np.zeros((2**n, spec.n_params), dtype=complex)
    suffix = np.eye(2**n, dtype=complex)  # gates later than the current one
    for g, state in zip(reversed(spec.gates), reversed(after)):
        jac[:, g.slot] += -0.5j * (suffix @ apply_generator(state, g.kind, g.qubits))
        suffix = suffix @ rotation_matrix(n, g.kind, g.qubits, theta[g.slot])
    return jac


def numerical_rank(jac: np.ndarray, rel_tol: float = 1e-10) -> int:
    if not 0 < rel_tol < 1:
        raise ContractError("rel_tol must lie in (0, 1)")
    jac = np.asarray(jac)
    real = np.vstack([jac.real, jac.imag])
    if not real.size:
        return 0
    s = np.linalg.svd(real, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def remove_phase_direction(jac: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Drop each column's component along the global-phase direction ``i psi``."""
    return jac - 1j * np.outer(psi, (psi.conj() @ jac).imag)


def circuit_state(spec: GeneratorSpec, theta: np.ndarray) -> np.ndarray:
    psi = basis_state(spec.n_qubits)
    for g in spec.gates:
        psi = apply_rotation(psi, g.kind, g.qubits, theta[g.slot])
    return psi


@dataclass
class RankReport:
    config: AncillaConfig
    n_layers: int
    n_params: int
    dim: int
    n_samples: int
    histogram: dict[int, int]
    generic_rank: int
    zero_param_rank: int
    rel_tol: float
    exception_fraction: float
    phase_quotient_rank: int
    ranks: list[int] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.value,
            "n_layers": self.n_layers,
            "n_params": self.n_params,
            "dim": self.dim,
            "n_samples": self.n_samples,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "generic_rank": self.generic_rank,
            "zero_param_rank": self.zero_param_rank,
            "rel_tol": self.rel_tol,
            "exception_fraction": self.exception_fraction,
            "phase_quotient_rank": self.phase_quotient_rank,
        }


def rank_report(spec: GeneratorSpec, samples: np.ndarray, rel_tol: float = 1e-10) -> RankReport:
    ranks, quotient = [], []
    for theta in samples:
        jac = state_jacobian(spec, theta)
        ranks.append(numerical_rank(jac, rel_tol))
        quotient.append(numerical_rank(remove_phase_direction(jac, circuit_state(spec, theta)), rel_tol))
    hist = collections.Counter(ranks)
    # ties go to the larger rank so the verdict does not depend on dict order
    modal = max(hist, key=lambda r: (hist[r], r))
    q_hist = collections.Counter(quotient)
    zero = numerical_rank(state_jacobian(spec, np.zeros(spec.n_params)), rel_tol)
    return RankReport(
        config=spec.ancilla,
        n_layers=spec.n_layers,
        n_params=spec.n_params,
        dim=2**spec.n_qubits,
        n_samples=len(ranks),
        histogram=dict(hist),
        generic_rank=modal,
        zero_param_rank=zero,
        rel_tol=rel_tol,
        exception_fraction=1.0 - hist[modal] / len(ranks),
        phase_quotient_rank=max(q_hist, key=lambda r: (q_hist[r], r)),
        ranks=ranks,
    )


def expressivity_study(configs, n_layers: int = 1, n_samples: int = 1000, rng=None,
                       n_qubits: int = 3, rel_tol: float = 1e-10) -> list[RankReport]:
    """Rank statistics for uniformly drawn angles, one report per configuration."""
    if n_samples < 1:
        raise ContractError("n_samples must be at least 1")
    rng = np.random.default_rng(rng)
    reports = []
    for config in configs:
        spec = build_generator_spec(n_qubits, n_layers, AncillaConfig(config))
        samples = rng.uniform(0.0, 2 * np.pi, size=(n_samples, spec.n_params))
        reports.append(rank_report(spec, samples, rel_tol))
    return reports


def ordering_verdict(reports: list[RankReport]) -> dict:
    """Checks strict growth A1 < A3 < A4 of the generic rank and equal ranks at zero angles."""
    by = {r.config: r for r in reports}
    chain = [c for c in (AncillaConfig.A1, AncillaConfig.A3, AncillaConfig.A4) if c in by]
    generic = [by[c].generic_rank for c in chain]
    zero = [by[c].zero_param_rank for c in chain]
    return {
        "configs": [c.value for c in chain],
        "generic_ranks": generic,
        "zero_param_ranks": zero,
        "ordering": "PASS" if len(chain) == 3 and generic[0] < generic[1] < generic[2] else "FAIL",
        "zero_param": "equal ranks" if len(set(zero)) == 1 else "unequal ranks",
    }


def nested_rank_pair(small: GeneratorSpec, large: GeneratorSpec, theta: np.ndarray, rel_tol: float = 1e-10):
    """Ranks of ``small`` at ``theta`` and of ``large`` with its extra angles at zero."""
    embedded, _ = embed_params(small, theta, large)
    return (
        numerical_rank(state_jacobian(small, theta), rel_tol),
        numerical_rank(state_jacobian(large, embedded), rel_tol),
    )
