import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_state
from shadowfit.errors import DomainError
from shadowfit.qubit import BASES, SIGMA_Z, Projector, PureHypothesis, density_from_hypothesis
from shadowfit.shadows import (
    SNAPSHOTS,
    apply_channel,
    invert_channel,
    shadow_norm_sq,
    snapshot_fidelities,
    snapshot_fidelity,
    snapshot_from_outcome,
)

# Independent oracle: measure in the computational basis after one of three
# basis-change unitaries (identity, Hadamard, Hadamard * S^dagger).
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
S_DAG = np.diag([1, -1j])
UNITARIES = (np.eye(2), HAD, HAD @ S_DAG)
KETS = (np.array([1, 0]), np.array([0, 1]))


def brute_force_outcomes():
    """Yield ``U^dag |b><b| U`` for the 3 x 2 outcomes."""
    for u in UNITARIES:
        for b in KETS:
            v = u.conj().T @ b
            yield np.outer(v, v.conj())


def channel_oracle(rho):
    return sum(np.trace(p @ rho) * p for p in brute_force_outcomes()) / 3


def shadow_norm_oracle(op, rho):
    inv = 3 * op - np.trace(op) * np.eye(2)
    return sum(np.real(np.trace(p @ rho)) * np.real(np.trace(p @ inv)) ** 2 for p in brute_force_outcomes()) / 3


def test_brute_force_outcomes_are_the_six_projectors():
    oracle = list(brute_force_outcomes())
    for p in Projector:
        ket = p.ket
        assert any(np.allclose(np.outer(ket, ket.conj()), q) for q in oracle), p


def test_channel_examples():
    np.testing.assert_allclose(apply_channel(np.eye(2) / 2), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(apply_channel(np.diag([1, 0])), channel_oracle(np.diag([1, 0])), atol=1e-15)
    np.testing.assert_allclose(apply_channel(np.diag([1, 0])), np.diag([2 / 3, 1 / 3]), atol=1e-15)
    np.testing.assert_allclose(apply_channel(SIGMA_Z), channel_oracle(SIGMA_Z), atol=1e-15)
    np.testing.assert_allclose(apply_channel(SIGMA_Z), SIGMA_Z / 3, atol=1e-15)


def test_channel_matches_oracle_and_depolarizing_form(rng):
    for _ in range(200):
        op = random_hermitian(rng)
        np.testing.assert_allclose(apply_channel(op), channel_oracle(op), atol=1e-13)
        np.testing.assert_allclose(apply_channel(op), (op + np.trace(op) * np.eye(2)) / 3, atol=1e-13)


def test_invert_examples():
    np.testing.assert_allclose(invert_channel(np.eye(2) / 2), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(invert_channel(np.diag([1, 0])), np.diag([2, -1]), atol=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    op = random_hermitian(np.random.default_rng(seed), scale=5.0)
    np.testing.assert_allclose(invert_channel(apply_channel(op)), op, atol=1e-12)
    np.testing.assert_allclose(apply_channel(invert_channel(op)), op, atol=1e-12)


def test_snapshot_examples():
    np.testing.assert_allclose(snapshot_from_outcome(Projector.H).operator, np.diag([2, -1]), atol=1e-15)
    d = snapshot_from_outcome(Projector.D).operator
    np.testing.assert_allclose(d, [[0.5, 1.5], [1.5, 0.5]], atol=1e-15)


@pytest.mark.parametrize("p", list(Projector))
def test_snapshot_structure(p):
    snap = snapshot_from_outcome(p)
    assert snap.source_projector is p
    assert snap.trace == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(snap.operator), [-1, 2], atol=1e-12)
    ket = p.ket
    np.testing.assert_allclose(snap.operator, invert_channel(np.outer(ket, ket.conj())), atol=1e-15)


def test_tomographic_completeness(rng):
    for pure in (True, False):
        for _ in range(100):
            rho = random_state(rng, pure=pure)
            avg = sum(np.real(np.trace(p @ rho)) * invert_channel(p) for p in brute_force_outcomes()) / 3
            np.testing.assert_allclose(avg, rho, atol=1e-12)


def test_fidelity_table_examples():
    assert snapshot_fidelity(PureHypothesis(0.0, 1.0), Projector.H) == pytest.approx(2.0)
    assert snapshot_fidelity(PureHypothesis(np.pi / 2, 0.0), Projector.A) == pytest.approx(-1.0)
    assert snapshot_fidelity(PureHypothesis(np.pi / 2, np.pi / 2), Projector.R) == pytest.approx(2.0)


@given(st.floats(0, np.pi), st.floats(-10, 10))
def test_fidelity_table_matches_numeric(theta, phi):
    eta = density_from_hypothesis(PureHypothesis(theta, phi))
    closed = snapshot_fidelities(theta, phi)
    numeric = [np.real(np.trace(eta @ s)) for s in SNAPSHOTS]
    np.testing.assert_allclose(closed, numeric, atol=1e-12)
    assert np.all(closed >= -1 - 1e-12) and np.all(closed <= 2 + 1e-12)


@given(st.floats(0, np.pi), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_basis_weighted_fidelity_is_unbiased(theta, phi, seed):
    # Born-weighted snapshot fidelity per basis, averaged over bases, equals tr(eta rho)
    rho = random_state(np.random.default_rng(seed))
    eta = density_from_hypothesis(PureHypothesis(theta, phi))
    fid = snapshot_fidelities(theta, phi)
    avg = sum(np.real(np.trace(projector_matrix_of(p) @ rho)) * fid[p] for basis in BASES for p in basis) / 3
    assert avg == pytest.approx(np.real(np.trace(eta @ rho)), abs=1e-12)


def projector_matrix_of(p):
    return np.outer(p.ket, p.ket.conj())


def test_shadow_norm_examples():
    # M^-1(sigma_z / 2) = 3 sigma_z / 2; only the Z basis contributes (3/2)^2 with weight 1/3
    assert shadow_norm_sq(SIGMA_Z / 2, np.eye(2) / 2) == pytest.approx(0.75, abs=1e-15)
    assert shadow_norm_sq(np.zeros((2, 2)), random_state(np.random.default_rng(3))) == 0.0
    hh = np.diag([1.0, 0.0])
    eta0 = hh - np.eye(2) / 2
    assert shadow_norm_sq(eta0, hh) == pytest.approx(shadow_norm_oracle(eta0, hh), abs=1e-15)


def test_shadow_norm_matches_oracle(rng):
    for _ in range(200):
        op, rho = random_hermitian(rng), random_state(rng)
        value = shadow_norm_sq(op, rho)
        assert value >= 0
        assert value == pytest.approx(shadow_norm_oracle(op, rho), abs=1e-12)


def test_shadow_norm_rejects_unphysical_state():
    with pytest.raises(DomainError):
        shadow_norm_sq(SIGMA_Z, np.diag([2.0, -1.0]))
