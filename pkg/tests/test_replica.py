"""Exact replica-average engines vs oracles and closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowlab import oracle, replica
from shadowlab.replica import (
    avg_fidelity_exact,
    avg_purity_curve,
    avg_purity_exact,
    collision_Z,
    collision_log_curve,
    gate_superop_tilde,
    permutation_layer,
    site_tilde_vectors,
    symmetric_lift,
    t_star,
)

MU = 0.05


def _true_product_purity(n):
    return (math.cos(MU) ** 4 + math.sin(MU) ** 4) ** n


# ---------------------------------------------------------------------------
# gate superoperator
# ---------------------------------------------------------------------------

def test_gate_superop_matches_exhaustive_average():
    t0, t1 = site_tilde_vectors()
    TT = oracle.tilde_pair_basis(t0, t1)
    acc = oracle.four_replica_gate_average()
    assert np.abs(TT @ acc @ TT.T - gate_superop_tilde()).max() < 1e-12


def test_gate_superop_is_projector():
    g = gate_superop_tilde()
    assert np.abs(g @ g - g).max() < 1e-12
    eigs = sorted(np.linalg.eigvals(g).real)
    np.testing.assert_allclose(eigs, [0, 0, 1, 1], atol=1e-12)


def test_average_has_no_leakage_outside_tilde_span():
    t0, t1 = site_tilde_vectors()
    TT = oracle.tilde_pair_basis(t0, t1)
    acc = oracle.four_replica_gate_average()
    proj = TT.T @ TT
    # both range and support of the averaged gate lie in the tilde span
    assert np.abs(acc - proj @ acc @ proj).max() < 1e-12


# ---------------------------------------------------------------------------
# collision probability Z_t
# ---------------------------------------------------------------------------

def test_collision_boundary_values():
    assert collision_Z(4, "chain1d", 0) == pytest.approx(1.0)
    assert collision_Z(8, "alltoall", 0) == pytest.approx(1.0)


def test_collision_single_gate_is_haar_value():
    # one two-qubit gate on N=2 is a global Clifford: Z = 2/(d(d+1))
    assert collision_Z(2, "chain1d", 1) == pytest.approx(0.1, abs=1e-13)
    assert collision_Z(2, "alltoall", 1) == pytest.approx(0.1, abs=1e-13)


def test_collision_chain_equals_symmetric_engine_at_n2():
    a = collision_log_curve(2, "chain1d", 6)
    b = collision_log_curve(2, "alltoall", 6)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_collision_converges_to_haar():
    for n, arch in ((6, "chain1d"), (8, "alltoall")):
        d = 2.0 ** n
        z = collision_Z(n, arch, 120)
        assert z == pytest.approx(2.0 / (d * (d + 1.0)), rel=1e-10)


def test_fidelity_mean_single_gate_n2():
    # (d+1) d Z - 1 with Z = 0.1, d = 4
    assert avg_fidelity_exact(2, "chain1d", 1) == pytest.approx(1.0,
                                                                abs=1e-12)


def test_w_boundary_norm_identity():
    for n in (2, 4, 8, 16):
        w, lognorm = replica._w_boundary_log(n)
        # boundary vector has squared norm 3^{-N}
        total = 2.0 * lognorm + math.log(float(w @ w))
        assert total == pytest.approx(-n * math.log(3.0), abs=1e-10)


def test_permutation_layer_matches_brute_force_n2():
    t0, t1 = site_tilde_vectors()
    TT = oracle.tilde_pair_basis(t0, t1)
    acc = oracle.four_replica_gate_average()
    W = np.vstack([TT[0], (TT[1] + TT[2]) / math.sqrt(2.0), TT[3]])
    assert np.abs(W @ acc @ W.T - permutation_layer(2)).max() < 1e-12


def test_permutation_layer_matches_mpmath():
    from shadowlab.replica import _perm_layer_mp
    for n in (2, 6, 12):
        lf = permutation_layer(n)
        lm = np.array([[float(x) for x in row] for row in _perm_layer_mp(n)])
        assert np.abs(lf - lm).max() < 1e-13


def test_symmetric_lift_of_identity():
    # lifting the identity site matrix gives the identity on the W basis
    lifted = symmetric_lift(np.eye(2), 5)
    np.testing.assert_allclose(lifted, np.eye(6), atol=1e-12)


# ---------------------------------------------------------------------------
# purity engine
# ---------------------------------------------------------------------------

def test_purity_site_observable_diagonal_form():
    rho = np.diag([math.cos(MU) ** 2, math.sin(MU) ** 2])
    B, corner = replica.site_observable_product(rho)
    p2 = math.cos(MU) ** 4 + math.sin(MU) ** 4
    np.testing.assert_allclose(B, np.diag([0.5, (p2 - 0.5) / 3.0]),
                               atol=1e-14)


def test_purity_unmeasured_single_site():
    # N=1, t=0: direct Z-basis measurement of the diagonal state gives
    # E[P~] = 9 sum_b p(b)^2 - 4
    p2 = math.cos(MU) ** 4 + math.sin(MU) ** 4
    val = avg_purity_exact(1, "chain1d", 0, ("product", MU))
    assert val == pytest.approx(9.0 * p2 - 4.0, abs=1e-12)


def test_purity_n2_single_bond_is_three_design():
    # one two-qubit Clifford gate is a global Clifford on N=2, so the
    # estimator is already unbiased at every t >= 1
    for t in (1, 2, 5, 9):
        for arch in ("chain1d", "alltoall"):
            val = avg_purity_exact(2, arch, t, ("product", MU))
            assert val == pytest.approx(_true_product_purity(2), rel=1e-12)
        ghz = avg_purity_exact(2, "chain1d", t, ("ghz",))
        assert ghz == pytest.approx(1.0, rel=1e-12)


def test_purity_matches_exhaustive_oracle_n2():
    d = 4
    psi = np.zeros(d, dtype=complex)
    psi[0] = psi[-1] = 1.0 / math.sqrt(2.0)
    rho = np.outer(psi, psi.conj())
    mean, _ = oracle.exhaustive_global_purity_moments(rho, 2, 2)
    assert avg_purity_exact(2, "chain1d", 3, ("ghz",)) == pytest.approx(
        mean, rel=1e-12)


def test_purity_converges_to_true_value():
    assert avg_purity_exact(4, "chain1d", 40, ("product", MU)) == (
        pytest.approx(_true_product_purity(4), rel=1e-9))
    assert avg_purity_exact(6, "chain1d", 60, ("ghz",)) == pytest.approx(
        1.0, rel=1e-8)
    assert avg_purity_exact(12, "alltoall", 60, ("product", MU)) == (
        pytest.approx(_true_product_purity(12), rel=1e-10))


def test_purity_product_limit_value_n4():
    # 0.995016...^4 ~ 0.98021
    assert _true_product_purity(4) == pytest.approx(0.980215086, abs=1e-8)
    assert avg_purity_exact(4, "alltoall", 60, ("product", MU)) == (
        pytest.approx(0.980215086, abs=1e-7))


def test_purity_chain_matches_symmetric_engine_n2():
    ts = [1, 2, 3, 6]
    a = avg_purity_curve(2, "chain1d", ts, ("product", MU))
    b = avg_purity_curve(2, "alltoall", ts, ("product", MU))
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_purity_rejects_unsupported():
    with pytest.raises(ValueError):
        avg_purity_exact(4, "grid2d", 3, ("ghz",))
    with pytest.raises(ValueError):
        avg_purity_exact(replica.CHAIN_DENSE_MAX + 2, "chain1d", 3,
                         ("ghz",))
    with pytest.raises(ValueError):
        replica._purity_terms(("thermal", 0.1))


# ---------------------------------------------------------------------------
# t* extraction
# ---------------------------------------------------------------------------

def test_t_star_constant_curve():
    ts = [1, 2, 3, 4]
    assert t_star(ts, [1.0] * 4, 1.0, 0.1, relative=False) == 1


def test_t_star_monotone_curve():
    ts = list(range(1, 11))
    values = [1.0 + 2.0 ** -t for t in ts]
    assert t_star(ts, values, 1.0, 0.1, relative=False) == 4
    assert t_star(ts, values, 1.0, 1e-4, relative=False) is None


def test_t_star_requires_staying_within_band():
    ts = [1, 2, 3, 4, 5]
    values = [1.05, 1.3, 1.05, 1.01, 1.0]
    assert t_star(ts, values, 1.0, 0.1, relative=False) == 3


@given(st.floats(0.01, 0.5), st.integers(2, 30))
@settings(max_examples=30, deadline=None)
def test_t_star_threshold_monotone(delta, tmax):
    ts = list(range(1, tmax + 1))
    values = [1.0 + 0.8 ** t for t in ts]
    loose = t_star(ts, values, 1.0, 2.0 * delta, relative=False)
    tight = t_star(ts, values, 1.0, delta, relative=False)
    if tight is not None and loose is not None:
        assert loose <= tight
