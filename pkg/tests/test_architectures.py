"""Circuit-plan construction: layer structure, determinism, inversion."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowlab import oracle
from shadowlab.architectures import build_circuit, inverse_circuit


def test_chain_brickwork_layers():
    plan = build_circuit("chain1d", 4, 2, seed=0)
    layers = plan.layers()
    assert [p for p, _ in layers][0] == [(0, 1), (2, 3)]
    assert [p for p, _ in layers][1] == [(1, 2)]


def test_chain_layer_parity_alternates():
    plan = build_circuit("chain1d", 7, 6, seed=5)
    for li, (pairs, _) in enumerate(plan.layers()):
        assert [a for a, _ in pairs] == list(range(li % 2, 6, 2))
        for a, b in pairs:
            assert b == a + 1


def test_grid2d_cycles_four_directions():
    plan = build_circuit("grid2d", 9, 8, seed=1)
    side = 3
    for li, (pairs, _) in enumerate(plan.layers()):
        for a, b in pairs:
            ra, ca = divmod(a, side)
            rb, cb = divmod(b, side)
            assert abs(ra - rb) + abs(ca - cb) == 1
        # pairs are disjoint
        flat = [q for p in pairs for q in p]
        assert len(flat) == len(set(flat))


def test_alltoall_perfect_matching():
    plan = build_circuit("alltoall", 6, 5, seed=2)
    for pairs, _ in plan.layers():
        flat = sorted(q for p in pairs for q in p)
        assert flat == list(range(6))


def test_alltoall_matchings_uniform():
    # N=4 has 3 perfect matchings; check rough uniformity
    counts = {}
    trials = 3000
    for seed in range(trials):
        plan = build_circuit("alltoall", 4, 1, seed=seed)
        key = tuple(sorted(tuple(sorted(p)) for p in plan.layers()[0][0]))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    for c in counts.values():
        assert abs(c / trials - 1 / 3) < 4 * np.sqrt(2 / 9 / trials)


def test_validation_errors():
    with pytest.raises(ValueError):
        build_circuit("chain1d", 1, 2, seed=0)
    with pytest.raises(ValueError):
        build_circuit("grid2d", 8, 2, seed=0)  # not a square
    with pytest.raises(ValueError):
        build_circuit("alltoall", 5, 2, seed=0)  # odd N
    with pytest.raises(ValueError):
        build_circuit("ring", 4, 2, seed=0)
    with pytest.raises(ValueError):
        build_circuit("chain1d", 4, -1, seed=0)


@given(st.integers(0, 2 ** 63 - 1), st.integers(2, 8), st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_plans_deterministic_in_seed(seed, n, depth):
    a = build_circuit("chain1d", n, depth, seed)
    b = build_circuit("chain1d", n, depth, seed)
    np.testing.assert_array_equal(a.pairs, b.pairs)
    np.testing.assert_array_equal(a.gate_ids, b.gate_ids)
    np.testing.assert_array_equal(a.npairs, b.npairs)


def test_inverse_circuit_is_dense_inverse():
    n = 3
    d = 1 << n
    rng = np.random.default_rng(4)
    for arch, nn in (("chain1d", 3), ("alltoall", 4)):
        dd = 1 << nn
        for seed in range(5):
            plan = build_circuit(arch, nn, 4, seed)
            inv = inverse_circuit(plan)
            psi = rng.normal(size=dd) + 1j * rng.normal(size=dd)
            psi /= np.linalg.norm(psi)
            back = oracle.dense_apply(inv, oracle.dense_apply(plan, psi))
            # Clifford inverses recover the state up to a global phase.
            phase = np.vdot(psi, back)
            assert abs(abs(phase) - 1.0) < 1e-10
            assert np.abs(back * np.conj(phase) - psi).max() < 1e-10


def test_identity_plan_is_noop():
    psi = np.zeros(8, dtype=complex)
    psi[3] = 1.0
    plan = build_circuit("chain1d", 3, 0, seed=9)
    np.testing.assert_allclose(oracle.dense_apply(plan, psi), psi)


def test_norm_drift_after_100_layers():
    plan = build_circuit("chain1d", 4, 100, seed=11)
    psi = np.full(16, 0.25, dtype=complex)
    out = oracle.dense_apply(plan, psi)
    assert abs(np.linalg.norm(out) - 1.0) < 1e-12
