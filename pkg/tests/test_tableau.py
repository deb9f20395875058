"""Stabilizer tableau vs the dense statevector oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowlab import oracle
from shadowlab.architectures import build_circuit
from shadowlab.pauli import PauliString
from shadowlab.tableau import StabilizerTableau, noise_thresholds, prepare


def test_symplectic_invariant_after_random_plans():
    for seed in range(20):
        tab = StabilizerTableau.zero(4)
        tab.apply_plan(build_circuit("chain1d", 4, 6, seed))
        assert tab.verify_symplectic()


def test_ghz_overlap_with_zero():
    for n in (2, 3, 5, 8):
        ghz = StabilizerTableau.ghz(n)
        assert ghz.basis_overlap_sq(0) == pytest.approx(0.5)
        assert ghz.basis_overlap_sq((1 << n) - 1) == pytest.approx(0.5)
        assert ghz.basis_overlap_sq(1) == 0.0


def _rev(b: int, n: int) -> int:
    """Tableau masks put qubit 0 in the low bit; the dense oracle puts
    qubit 0 in the leading position of the basis index."""
    return int(f"{b:0{n}b}"[::-1], 2)


def test_born_probabilities_match_dense_oracle():
    n = 3
    psi0 = np.zeros(1 << n, dtype=complex)
    psi0[0] = 1.0
    for seed in range(10):
        plan = build_circuit("chain1d", n, 4, seed)
        tab = StabilizerTableau.zero(n)
        tab.apply_plan(plan)
        psi = oracle.dense_apply(plan, psi0)
        for b in range(1 << n):
            assert tab.basis_overlap_sq(b) == pytest.approx(
                abs(psi[_rev(b, n)]) ** 2, abs=1e-12)


def test_inverse_plan_undoes_plan():
    from shadowlab.architectures import inverse_circuit
    for seed in range(10):
        plan = build_circuit("alltoall", 6, 5, seed)
        tab = StabilizerTableau.ghz(6)
        tab.apply_plan(plan)
        tab.apply_plan(inverse_circuit(plan))
        assert tab.overlap_sq(StabilizerTableau.ghz(6)) == pytest.approx(1.0)


def test_measure_all_z_deterministic_in_key():
    tab = StabilizerTableau.ghz(5)
    tab.apply_plan(build_circuit("chain1d", 5, 3, seed=7))
    a = tab.copy().measure_all_z(key=42)
    b = tab.copy().measure_all_z(key=42)
    np.testing.assert_array_equal(a, b)
    # a GHZ state measured directly gives all-equal bits
    bits = StabilizerTableau.ghz(5).measure_all_z(key=1)
    assert len(set(bits.tolist())) == 1


def test_measurement_frequencies_match_born():
    tab = StabilizerTableau.zero(2)
    tab.apply_plan(build_circuit("chain1d", 2, 1, seed=3))
    probs = np.array([tab.basis_overlap_sq(b) for b in range(4)])
    counts = np.zeros(4)
    trials = 4000
    for k in range(trials):
        bits = tab.copy().measure_all_z(key=k)
        counts[int(bits[0]) << 1 | int(bits[1])] += 1
    freq = counts / trials
    assert np.abs(freq - probs).max() < 5 * np.sqrt(0.25 / trials) + 0.02


def test_expectation_sign_vs_dense():
    n = 3
    ghz = np.zeros(1 << n, dtype=complex)
    ghz[0] = ghz[-1] = 1.0 / np.sqrt(2.0)
    for seed in range(5):
        plan = build_circuit("chain1d", n, 3, seed)
        tab = StabilizerTableau.ghz(n)
        tab.apply_plan(plan)
        psi = oracle.dense_apply(plan, ghz)
        for label in ("ZZI", "XXX", "IZZ", "YYI"):
            p = PauliString.from_label(label)
            code = 0
            for q in range(n):
                code |= ((p.x_bits >> q) & 1) << (2 * q)
                code |= ((p.z_bits >> q) & 1) << (2 * q + 1)
            dense_val = np.real(np.vdot(psi, oracle.pauli_matrix(code, n) @ psi))
            assert dense_val == pytest.approx(
                float(tab.expectation_sign(p)), abs=1e-9)


def test_noise_thresholds_partition():
    tx, ty, tz = noise_thresholds(0.3)
    # uint64 thresholds carve [0, 2^64) into I/X/Y/Z regions of the
    # depolarizing trajectory: each Pauli has probability p/4
    span = 2.0 ** 64
    assert tx / span == pytest.approx(0.3 / 4, rel=1e-9)
    assert ty / span == pytest.approx(0.3 / 2, rel=1e-9)
    assert tz / span == pytest.approx(0.3 * 3 / 4, rel=1e-9)


def test_depolarizing_trajectory_rates():
    n, p, trials = 4, 0.25, 3000
    flips = 0
    for k in range(trials):
        tab = StabilizerTableau.zero(n)
        tab.apply_depolarizing_trajectory(p, key=k)
        bits = tab.measure_all_z(key=k + 10 ** 6)
        flips += int(bits.sum())
    # X or Y each flip a |0> qubit: rate p/2
    rate = flips / (trials * n)
    assert rate == pytest.approx(p / 2, abs=4 * np.sqrt(p / 2 / trials))


@given(st.integers(0, 2 ** 4 - 1))
@settings(max_examples=16, deadline=None)
def test_basis_state_overlap(bits):
    tab = StabilizerTableau.basis_state(4, bits)
    assert tab.basis_overlap_sq(bits) == 1.0
    assert tab.basis_overlap_sq(bits ^ 1) == 0.0


def test_prepare_specs():
    assert prepare("zero", 3).basis_overlap_sq(0) == 1.0
    assert prepare("ghz", 3).basis_overlap_sq(0) == 0.5
    assert prepare("cluster2d", 4).verify_symplectic()
    t1 = prepare("random_stabilizer(2, 9)", 4)
    t2 = prepare(("random_stabilizer", 2, 9), 4)
    assert t1.overlap_sq(t2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        prepare("bogus", 3)
