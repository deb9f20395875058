"""Snapshot collection, estimators, statistics, and archives."""

import math

import numpy as np
import pytest

from shadowlab import shadows
from shadowlab.pauli import PauliString
from shadowlab.tableau import prepare


# ---------------------------------------------------------------------------
# reference per-snapshot path vs compiled batch path
# ---------------------------------------------------------------------------

def _reference_series(kind, state, extra, arch, n, depth, seed, m, r):
    out = np.empty(r)
    for realization in range(r):
        snaps = shadows.collect_snapshots(state, "none", arch, n, depth,
                                          seed, realization, m)
        if kind == "fidelity":
            out[realization] = shadows.fidelity_estimate(
                snaps, prepare(extra, n))
        elif kind == "purity":
            out[realization] = shadows.purity_estimate(snaps)
        else:
            out[realization] = shadows.pauli_estimate(snaps, extra)
    return out


@pytest.mark.parametrize("arch", ["chain1d", "alltoall"])
def test_fidelity_batch_matches_reference(arch):
    n, depth, m, r, seed = 4, 6, 5, 8, 1234
    batch = shadows.collect_fidelity_series("ghz", "ghz", "none", arch, n,
                                            depth, seed, m, r)
    ref = _reference_series("fidelity", "ghz", "ghz", arch, n, depth, seed,
                            m, r)
    np.testing.assert_allclose(batch, ref, atol=1e-12)


def test_fidelity_batch_matches_reference_noisy():
    n, depth, m, r, seed = 4, 6, 5, 8, 77
    batch = shadows.collect_fidelity_series(
        "zero", "zero", ("depolarizing", 0.2), "chain1d", n, depth, seed,
        m, r)
    ref = np.empty(r)
    for realization in range(r):
        snaps = shadows.collect_snapshots(
            "zero", ("depolarizing", 0.2), "chain1d", n, depth, seed,
            realization, m)
        ref[realization] = shadows.fidelity_estimate(snaps, prepare("zero", n))
    np.testing.assert_allclose(batch, ref, atol=1e-12)


@pytest.mark.parametrize("arch", ["chain1d", "alltoall"])
def test_purity_batch_matches_reference(arch):
    n, depth, m, r, seed = 4, 6, 5, 8, 99
    batch = shadows.collect_purity_series("ghz", "none", arch, n, depth,
                                          seed, m, r)
    ref = _reference_series("purity", "ghz", None, arch, n, depth, seed, m, r)
    np.testing.assert_allclose(batch, ref, atol=1e-10)


@pytest.mark.parametrize("label", ["XXXX", "ZZII", "XYZI"])
def test_pauli_batch_matches_reference(label):
    n, depth, m, r, seed = 4, 6, 5, 8, 5150
    pauli = PauliString.from_label(label)
    batch = shadows.collect_pauli_series("ghz", pauli, "none", "chain1d", n,
                                         depth, seed, m, r)
    ref = _reference_series("pauli", "ghz", pauli, "chain1d", n, depth,
                            seed, m, r)
    np.testing.assert_allclose(batch, ref, atol=1e-12)


# ---------------------------------------------------------------------------
# stream independence and extension invariance
# ---------------------------------------------------------------------------

def test_extending_r_preserves_earlier_realizations():
    n, depth, m, seed = 4, 6, 5, 42
    short = shadows.collect_fidelity_series("ghz", "ghz", "none", "chain1d",
                                            n, depth, seed, m, 8)
    long = shadows.collect_fidelity_series("ghz", "ghz", "none", "chain1d",
                                           n, depth, seed, m, 16)
    np.testing.assert_array_equal(short, long[:8])


def test_series_deterministic_in_master_seed():
    args = ("ghz", "ghz", "none", "chain1d", 4, 6, 42, 5, 8)
    a = shadows.collect_fidelity_series(*args)
    b = shadows.collect_fidelity_series(*args)
    np.testing.assert_array_equal(a, b)
    c = shadows.collect_fidelity_series("ghz", "ghz", "none", "chain1d",
                                        4, 6, 43, 5, 8)
    assert not np.array_equal(a, c)


def test_snapshot_keys_differ_across_realizations():
    keys = {shadows.snapshot_key(7, r, m) for r in range(50)
            for m in range(50)}
    assert len(keys) == 2500


# ---------------------------------------------------------------------------
# estimator term structure
# ---------------------------------------------------------------------------

def test_fidelity_terms_within_bounds():
    # each single-snapshot term lies in [-1, 2^N]; the M-mean inherits it
    n = 4
    vals = shadows.collect_fidelity_series("ghz", "ghz", "none", "chain1d",
                                           n, 8, 3, 1, 200)
    assert vals.min() >= -1.0 - 1e-12
    assert vals.max() <= 2.0 ** n + 1e-12


def test_pauli_values_are_on_lattice():
    # with M=1 each value is 0 or +-(2^N+1)
    n = 4
    pauli = PauliString.from_label("ZZII")
    vals = shadows.collect_pauli_series("ghz", pauli, "none", "chain1d", n,
                                        8, 3, 1, 200)
    lattice = {0.0, 2.0 ** n + 1.0, -(2.0 ** n + 1.0)}
    assert set(np.round(vals, 9)) <= lattice


def test_purity_estimate_is_order_invariant():
    snaps = shadows.collect_snapshots("ghz", "none", "chain1d", 4, 6, 11, 0, 6)
    a = shadows.purity_estimate(snaps)
    b = shadows.purity_estimate(list(reversed(snaps)))
    assert a == pytest.approx(b, rel=1e-12)


def test_purity_estimate_needs_two_snapshots():
    snaps = shadows.collect_snapshots("ghz", "none", "chain1d", 4, 6, 11, 0, 1)
    with pytest.raises(ValueError):
        shadows.purity_estimate(snaps)


def test_pauli_estimate_rejects_identity_and_nonhermitian():
    snaps = shadows.collect_snapshots("ghz", "none", "chain1d", 4, 6, 11, 0, 2)
    with pytest.raises(ValueError):
        shadows.pauli_estimate(snaps, PauliString.from_label("IIII"))


def test_parse_noise():
    assert shadows.parse_noise("none") == 0.0
    assert shadows.parse_noise(None) == 0.0
    assert shadows.parse_noise(("depolarizing", 0.3)) == 0.3
    assert shadows.parse_noise("depolarizing(0.15)") == 0.15
    with pytest.raises(ValueError):
        shadows.parse_noise("gauss")
    with pytest.raises(ValueError):
        shadows.parse_noise(("depolarizing", 1.5))


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def test_batch_statistics_mean_and_stderr():
    rng = np.random.default_rng(0)
    vals = rng.normal(3.0, 2.0, size=4000)
    st = shadows.batch_statistics(vals, b_resamples=200, m_snapshots=7)
    assert st.mean == pytest.approx(float(vals.mean()), abs=1e-12)
    s2 = float(vals.var(ddof=1))
    assert st.sample_variance == pytest.approx(s2, abs=1e-12)
    assert st.stderr == pytest.approx(math.sqrt(s2 / vals.size), abs=1e-12)
    assert st.r_count == 4000 and st.m_snapshots == 7
    # bootstrap spread of S^2 for a normal sample: ~ S^2 sqrt(2/R)
    assert st.variance_err == pytest.approx(s2 * math.sqrt(2.0 / vals.size),
                                            rel=0.3)


def test_batch_statistics_bootstrap_deterministic():
    vals = np.arange(100, dtype=float)
    a = shadows.batch_statistics(vals, bootstrap_seed=5)
    b = shadows.batch_statistics(vals, bootstrap_seed=5)
    assert a.variance_err == b.variance_err
    c = shadows.batch_statistics(vals, bootstrap_seed=6)
    assert a.variance_err != c.variance_err


def test_batch_statistics_validation():
    with pytest.raises(ValueError):
        shadows.batch_statistics(np.array([1.0]))
    with pytest.raises(ValueError):
        shadows.batch_statistics(np.arange(10.0), b_resamples=1)


# ---------------------------------------------------------------------------
# archives
# ---------------------------------------------------------------------------

def test_snapshot_archive_roundtrip(tmp_path):
    snaps = shadows.collect_snapshots("ghz", "none", "chain1d", 5, 7, 8, 0, 9)
    path = tmp_path / "snaps.ndjson"
    shadows.save_snapshots(path, snaps)
    back = shadows.load_snapshots(path)
    assert len(back) == len(snaps)
    for a, b in zip(snaps, back):
        assert (a.architecture, a.n, a.depth, a.plan_seed) == \
            (b.architecture, b.n, b.depth, b.plan_seed)
        np.testing.assert_array_equal(a.outcome, b.outcome)
    # estimates replay identically from the archive
    assert shadows.purity_estimate(back) == pytest.approx(
        shadows.purity_estimate(snaps), rel=1e-12)


def test_outcomes_fast_matches_per_snapshot_path():
    n, depth, seed = 5, 6, 17
    packed = shadows.collect_outcomes_fast("ghz", "none", "chain1d", n,
                                           depth, seed, 40)
    for s in range(40):
        skey = shadows.snapshot_key(seed, s, 0)
        plan_seed, _, _ = shadows.derived_keys(skey)
        plan = __import__("shadowlab.architectures",
                          fromlist=["build_circuit"]).build_circuit(
            "chain1d", n, depth, plan_seed)
        snap = shadows.collect_snapshot("ghz", "none", plan, skey)
        assert int(packed[s, 0]) == snap.outcome_mask()
