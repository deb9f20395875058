"""Brute-force oracles: group enumeration, dense evolution, faithfulness."""

import numpy as np
import pytest

from shadowlab import oracle
from shadowlab.architectures import build_circuit


def _random_density(n, seed):
    rng = np.random.default_rng(seed)
    d = 1 << n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# ---------------------------------------------------------------------------
# Clifford group enumeration
# ---------------------------------------------------------------------------

def test_two_qubit_unitaries_are_unitary_and_distinct():
    us = oracle.two_qubit_unitaries()
    assert us.shape == (11520, 4, 4)
    idx = np.random.default_rng(0).choice(11520, size=64, replace=False)
    for i in idx:
        np.testing.assert_allclose(us[i] @ us[i].conj().T, np.eye(4),
                                   atol=1e-12)


def test_single_qubit_unitaries_are_unitary():
    us = oracle.single_qubit_unitaries()
    assert us.shape == (24, 2, 2)
    for U in us:
        np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-12)


def test_unitaries_match_their_pauli_action():
    # gate index i must conjugate Paulis the same way the tableau tables do
    us = oracle.two_qubit_unitaries()
    idx = np.random.default_rng(1).choice(11520, size=16, replace=False)
    for i in idx:
        out, sgn = oracle.action_table_from_unitary(us[i], 2)
        # re-deriving the action from the unitary must be self-consistent
        for v in (1, 2, 5, 10, 15):
            P = oracle.pauli_matrix(v, 2)
            Q = us[i] @ P @ us[i].conj().T
            expect = (-1.0) ** sgn[v] * oracle.pauli_matrix(int(out[v]), 2)
            np.testing.assert_allclose(Q, expect, atol=1e-12)


def test_group_average_is_projector():
    # the 4-replica average over a group is idempotent
    acc = oracle.four_replica_gate_average()
    np.testing.assert_allclose(acc @ acc, acc, atol=1e-10)
    evals = np.linalg.eigvalsh((acc + acc.T) / 2.0)
    assert np.all((np.abs(evals) < 1e-8) | (np.abs(evals - 1.0) < 1e-8))


# ---------------------------------------------------------------------------
# dense plan evolution
# ---------------------------------------------------------------------------

def test_dense_apply_preserves_norm_and_composes():
    rng = np.random.default_rng(2)
    n, d = 4, 16
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    plan = build_circuit("chain1d", n, 6, 123)
    out = oracle.dense_apply(plan, psi)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12
    # channel evolution of |psi><psi| matches vector evolution
    rho = oracle.dense_apply_channel(plan, np.outer(psi, psi.conj()))
    np.testing.assert_allclose(rho, np.outer(out, out.conj()), atol=1e-12)


def test_dense_apply_respects_cap():
    plan = build_circuit("chain1d", 24, 2, 0)
    with pytest.raises(ValueError):
        oracle.dense_apply(plan, np.zeros(1 << 24))


def test_depolarize_dense_fixed_points():
    n = 2
    rho = _random_density(n, 5)
    np.testing.assert_allclose(oracle.depolarize_dense(rho, 0.0, n), rho,
                               atol=1e-14)
    maxmix = np.eye(1 << n) / (1 << n)
    np.testing.assert_allclose(oracle.depolarize_dense(rho, 1.0, n), maxmix,
                               atol=1e-12)
    out = oracle.depolarize_dense(rho, 0.3, n)
    assert np.trace(out) == pytest.approx(1.0, abs=1e-12)


def test_dense_fidelity_purity_known_values():
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)  # 2-qubit GHZ
    rho = np.outer(psi, psi.conj())
    fid, pur = oracle.dense_fidelity_purity(rho, psi)
    assert fid == pytest.approx(1.0, abs=1e-14)
    assert pur == pytest.approx(1.0, abs=1e-14)
    maxmix = np.eye(4) / 4.0
    fid, pur = oracle.dense_fidelity_purity(maxmix, psi)
    assert fid == pytest.approx(0.25, abs=1e-14)
    assert pur == pytest.approx(0.25, abs=1e-14)


def test_born_probabilities_normalized():
    rho = _random_density(2, 7)
    p = oracle.born_probabilities(rho)
    assert p.min() >= -1e-14
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# faithfulness of the approximate-inverse snapshot average
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2])
def test_snapshot_mean_reproduces_state(n):
    rho = _random_density(n, 11 + n)
    mean = oracle.exhaustive_snapshot_mean(rho, n)
    np.testing.assert_allclose(mean, rho, atol=1e-12)


def test_exhaustive_fidelity_mean_is_true_fidelity():
    n, d = 2, 4
    rng = np.random.default_rng(13)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    rho = _random_density(n, 17)
    mean, var = oracle.exhaustive_global_fidelity_moments(rho, psi, n)
    true = float(np.real(psi.conj() @ rho @ psi))
    assert mean == pytest.approx(true, abs=1e-12)
    assert var > 0.0


def test_exhaustive_purity_mean_is_true_purity():
    rho = _random_density(2, 19)
    p2 = float(np.real(np.trace(rho @ rho)))
    mean, var = oracle.exhaustive_global_purity_moments(rho, 2, 4)
    assert mean == pytest.approx(p2, abs=1e-12)
    assert var > 0.0


def test_exhaustive_pauli_mean_is_true_expectation():
    rho = _random_density(2, 23)
    for v in (0b0001, 0b1010, 0b1111):
        P = oracle.pauli_matrix(v, 2)
        mean, _ = oracle.exhaustive_global_pauli_moments(rho, v, 2)
        assert mean == pytest.approx(float(np.real(np.trace(P @ rho))),
                                     abs=1e-12)


def test_exhaustive_cap_enforced():
    rho = np.eye(8) / 8.0
    with pytest.raises(ValueError):
        oracle.exhaustive_snapshot_mean(rho, 3)
