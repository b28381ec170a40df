import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qgan_ancilla.ansatz import AncillaConfig, Gate, GeneratorSpec, build_generator_spec, init_params
from qgan_ancilla.expressivity import (
    circuit_state,
    expressivity_study,
    nested_rank_pair,
    numerical_rank,
    ordering_verdict,
    rank_report,
    state_jacobian,
)
from qgan_ancilla.sim import ContractError, apply_rotation, basis_state

import oracles


def fd_jacobian(spec, theta, h=1e-5):
    cols = []
    for k in range(spec.n_params):
        e = np.zeros_like(theta)
        e[k] = h
        cols.append((circuit_state(spec, theta + e) - circuit_state(spec, theta - e)) / (2 * h))
    return np.array(cols).T


def tiny(kinds):
    gates = tuple(Gate(k, (0,), i, 0) for i, k in enumerate(kinds))
    return GeneratorSpec(1, 1, AncillaConfig.NONE, gates)


def test_single_rx_column():
    theta = np.array([0.83])
    jac = state_jacobian(tiny(["RX"]), theta)
    expected = -0.5j * oracles.PAULI["X"] @ apply_rotation(basis_state(1), "RX", (0,), 0.83)
    np.testing.assert_allclose(jac[:, 0], expected, atol=1e-15)


def test_rx_then_rz_at_zero():
    spec = tiny(["RX", "RZ"])
    jac = state_jacobian(spec, np.zeros(2))
    np.testing.assert_allclose(jac, fd_jacobian(spec, np.zeros(2)), atol=1e-9)
    assert numerical_rank(jac) == numerical_rank(fd_jacobian(spec, np.zeros(2)), 1e-6) == 2


@settings(max_examples=100)
@given(config=st.sampled_from(["NONE", "A1", "A2", "A3", "A4"]), layers=st.integers(1, 2),
       seed=st.integers(0, 2**32 - 1))
def test_jacobian_matches_finite_differences(config, layers, seed):
    spec = build_generator_spec(3, layers, config)
    theta = init_params(spec, "RANDOM", np.random.default_rng(seed))
    assert np.max(np.abs(state_jacobian(spec, theta) - fd_jacobian(spec, theta))) < 1e-7


def test_a1_all_eleven_columns(rng):
    spec = build_generator_spec(3, 1, "A1")
    theta = init_params(spec, "RANDOM", rng)
    jac = state_jacobian(spec, theta)
    assert jac.shape == (16, 11)
    np.testing.assert_allclose(jac, fd_jacobian(spec, theta), atol=1e-7)


def test_jacobian_shape_check():
    with pytest.raises(ContractError):
        state_jacobian(build_generator_spec(3, 1, "A1"), np.zeros(3))


def test_rank_trivia():
    v = np.zeros((4, 1), dtype=complex)
    v[0] = 0.5
    assert numerical_rank(v) == 1
    assert numerical_rank(np.hstack([v, 3j * v])) == 2  # independent over the reals
    assert numerical_rank(np.hstack([v, -2 * v])) == 1
    assert numerical_rank(np.zeros((4, 3))) == 0
    with pytest.raises(ContractError):
        numerical_rank(v, 0.0)


@pytest.mark.parametrize("config", ["A1", "A3", "A4"])
def test_rank_insensitive_to_tolerance(config):
    spec = build_generator_spec(3, 1, config)
    rng = np.random.default_rng(2)
    for _ in range(20):
        jac = state_jacobian(spec, init_params(spec, "RANDOM", rng))
        assert len({numerical_rank(jac, tol) for tol in (1e-12, 1e-10, 1e-8, 1e-6)}) == 1


def test_rank_bounded(rng):
    for config in ["NONE", "A1", "A4"]:
        for layers in (1, 3):
            spec = build_generator_spec(3, layers, config)
            r = numerical_rank(state_jacobian(spec, init_params(spec, "RANDOM", rng)))
            assert r <= min(2 * 2**spec.n_qubits, spec.n_params)


@pytest.mark.parametrize("small,large", [("A1", "A3"), ("A3", "A4")])
def test_appending_a_gate_never_lowers_rank(small, large):
    s, l = build_generator_spec(3, 1, small), build_generator_spec(3, 1, large)
    rng = np.random.default_rng(8)
    for _ in range(50):
        rs, rl = nested_rank_pair(s, l, init_params(s, "RANDOM", rng))
        assert rl >= rs


def test_study_and_verdict():
    reports = expressivity_study(["A1", "A3", "A4"], 1, 200, 0)
    assert [r.generic_rank for r in reports] == [11, 12, 13]
    assert len({r.zero_param_rank for r in reports}) == 1
    assert all(sum(r.histogram.values()) == 200 for r in reports)
    verdict = ordering_verdict(reports)
    assert verdict["ordering"] == "PASS" and verdict["zero_param"] == "equal ranks"
    assert ordering_verdict(reports[:2])["ordering"] == "FAIL"


def test_single_sample_report():
    (rep,) = expressivity_study(["A4"], 1, 1, 3)
    assert rep.n_samples == 1 and sum(rep.histogram.values()) == 1
    assert rep.to_dict()["histogram"] == {str(rep.generic_rank): 1}
    with pytest.raises(ContractError):
        expressivity_study(["A4"], 1, 0, 3)


def test_study_is_seeded():
    a = expressivity_study(["A1"], 1, 20, 5)[0]
    b = expressivity_study(["A1"], 1, 20, 5)[0]
    assert a.to_dict() == b.to_dict()


def test_report_counts_exceptions():
    spec = build_generator_spec(3, 1, "A4")
    rng = np.random.default_rng(0)
    samples = np.vstack([rng.uniform(0, 2 * np.pi, (3, spec.n_params)), np.zeros((1, spec.n_params))])
    rep = rank_report(spec, samples)
    assert rep.generic_rank == 13 and rep.exception_fraction == pytest.approx(0.25)
