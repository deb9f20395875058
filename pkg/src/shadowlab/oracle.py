"""Brute-force dense-matrix reference implementations for tiny systems.

Everything here is deliberately slow and direct: dense statevectors /
density matrices, explicit 4x4 unitaries for all 11520 two-qubit Cliffords
(built by breadth-first composition from elementary gates), and exhaustive
channel averages used as ground truth by the test suite.  Hard caps keep
the costs bounded: dense evolution up to 6 qubits, exhaustive gate
enumeration up to 2 qubits.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .cliffords import gate_tables, single_qubit_tables, conjugate_table

DENSE_MAX_QUBITS = 6
EXHAUSTIVE_MAX_QUBITS = 2

_I2 = np.eye(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_matrix(v: int, n: int) -> np.ndarray:
    """Dense matrix of the Hermitian Pauli with bit code v (qubit 0 first).

    Tensor ordering: qubit 0 is the most significant factor, i.e. basis
    index b = b_0 b_1 ... b_{n-1} read as binary with qubit 0 leading.
    """
    single = {(0, 0): _I2, (1, 0): _X, (1, 1): _Y, (0, 1): _Z}
    m = np.eye(1, dtype=complex)
    for j in range(n):
        xb, zb = (v >> (2 * j)) & 1, (v >> (2 * j + 1)) & 1
        m = np.kron(m, single[(xb, zb)])
    return m


def action_table_from_unitary(U: np.ndarray, n: int):
    """Recover (out_bits, signs) of conjugation by U over all 4^n Paulis."""
    nb = 1 << (2 * n)
    paulis = [pauli_matrix(v, n) for v in range(nb)]
    out = np.zeros(nb, dtype=np.uint8)
    sgn = np.zeros(nb, dtype=np.uint8)
    for v in range(nb):
        m = U @ paulis[v] @ U.conj().T
        found = False
        for w in range(nb):
            c = np.trace(paulis[w].conj().T @ m) / (2 ** n)
            if abs(abs(c) - 1) < 1e-9:
                assert abs(c.imag) < 1e-9
                out[v] = w
                sgn[v] = 0 if c.real > 0 else 1
                found = True
                break
        assert found, "conjugate is not a signed Pauli"
    return out, sgn


_H1Q = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S1Q = np.array([[1, 0], [0, 1j]], dtype=complex)


@lru_cache(maxsize=1)
def two_qubit_unitaries() -> np.ndarray:
    """4x4 unitaries (up to global phase) for all 11520 gate indices.

    Built by BFS over conjugation actions starting from the identity, using
    H and S on each qubit plus CNOT(0,1) as generators.
    """
    gt = gate_tables()
    gens = {
        "H0": np.kron(_H1Q, _I2),
        "H1": np.kron(_I2, _H1Q),
        "S0": np.kron(_S1Q, _I2),
        "S1": np.kron(_I2, _S1Q),
        "CNOT01": np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            dtype=complex,
        ),
    }
    gen_actions = {k: action_table_from_unitary(U, 2) for k, U in gens.items()}

    def key(out, sgn):
        return (bytes(out), bytes(sgn))

    ident = (np.arange(16, dtype=np.uint8), np.zeros(16, dtype=np.uint8))
    seen = {key(*ident): np.eye(4, dtype=complex)}
    frontier = [ident]
    while frontier:
        nxt = []
        for out_c, sgn_c in frontier:
            Uc = seen[key(out_c, sgn_c)]
            for name, (out_g, sgn_g) in gen_actions.items():
                out_n = out_g[out_c]
                sgn_n = sgn_c ^ sgn_g[out_c]
                k = key(out_n, sgn_n)
                if k not in seen:
                    seen[k] = gens[name] @ Uc
                    nxt.append((out_n, sgn_n))
        frontier = nxt
    assert len(seen) == 11520
    us = np.zeros((11520, 4, 4), dtype=complex)
    for idx in range(11520):
        s, p = idx // 16, idx % 16
        out = gt.out_bits[s]
        sgn = np.array(
            [gt.base_sign[s, v] ^ ((v & p).bit_count() & 1) for v in range(16)],
            dtype=np.uint8,
        )
        us[idx] = seen[key(out, sgn)]
    return us


@lru_cache(maxsize=1)
def single_qubit_unitaries() -> np.ndarray:
    """2x2 unitaries (up to global phase) for the 24 single-qubit gate ids."""
    out_t, sgn_t = single_qubit_tables()
    gens = {"H": _H1Q, "S": _S1Q}
    gen_actions = {k: action_table_from_unitary(U, 1) for k, U in gens.items()}

    def key(out, sgn):
        return (bytes(out), bytes(sgn))

    ident = (np.arange(4, dtype=np.uint8), np.zeros(4, dtype=np.uint8))
    seen = {key(*ident): np.eye(2, dtype=complex)}
    frontier = [ident]
    while frontier:
        nxt = []
        for out_c, sgn_c in frontier:
            Uc = seen[key(out_c, sgn_c)]
            for name, (out_g, sgn_g) in gen_actions.items():
                k2 = (out_g[out_c], sgn_c ^ sgn_g[out_c])
                k = key(*k2)
                if k not in seen:
                    seen[k] = gens[name] @ Uc
                    nxt.append(k2)
        frontier = nxt
    assert len(seen) == 24
    us = np.zeros((24, 2, 2), dtype=complex)
    for idx in range(24):
        s, p = idx // 4, idx % 4
        sgn = np.array(
            [sgn_t[s, v] ^ ((v & p).bit_count() & 1) for v in range(4)],
            dtype=np.uint8,
        )
        us[idx] = seen[key(out_t[s], sgn)]
    return us


def gate_unitary(index: int) -> np.ndarray:
    return two_qubit_unitaries()[index]


def apply_gate_dense(state: np.ndarray, index: int, pair, n: int) -> np.ndarray:
    """Apply two-qubit gate `index` on qubits pair=(a,b) to a statevector."""
    a, b = pair
    U = gate_unitary(index)
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, (a, b), (0, 1)).reshape(4, -1)
    psi = (U @ psi).reshape((2, 2) + (2,) * (n - 2))
    psi = np.moveaxis(psi, (0, 1), (a, b))
    return np.ascontiguousarray(psi).reshape(-1)


def dense_apply(plan, state: np.ndarray) -> np.ndarray:
    """Evolve a dense statevector through a CircuitPlan."""
    if plan.n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense evolution capped at {DENSE_MAX_QUBITS} qubits")
    psi = np.asarray(state, dtype=complex).copy()
    for layer in range(plan.depth):
        for k in range(plan.npairs[layer]):
            a, b = plan.pairs[layer, k]
            psi = apply_gate_dense(psi, int(plan.gate_ids[layer, k]), (a, b), plan.n)
    return psi


def dense_apply_channel(plan, rho: np.ndarray) -> np.ndarray:
    """Evolve a dense density matrix through a CircuitPlan."""
    if plan.n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense evolution capped at {DENSE_MAX_QUBITS} qubits")
    d = 1 << plan.n
    m = np.asarray(rho, dtype=complex).copy()
    for layer in range(plan.depth):
        for k in range(plan.npairs[layer]):
            a, b = plan.pairs[layer, k]
            idx = int(plan.gate_ids[layer, k])
            # U m: act on columns; m U^dag: act on conjugated rows
            m = np.stack(
                [apply_gate_dense(m[:, j], idx, (a, b), plan.n) for j in range(d)],
                axis=1,
            )
            m = np.stack(
                [apply_gate_dense(m[j, :].conj(), idx, (a, b), plan.n).conj()
                 for j in range(d)],
                axis=0,
            )
    return m


def depolarize_dense(rho: np.ndarray, p: float, n: int) -> np.ndarray:
    """Exact single-qubit depolarizing channel on every qubit.

    Convention matching the trajectory sampler: identity with probability
    1 - 3p/4 and each of X, Y, Z with probability p/4, i.e. the channel
    rho -> (1-p) rho + (p/2) I per qubit.
    """
    m = np.asarray(rho, dtype=complex).copy()
    d = 1 << n
    for q in range(n):
        acc = (1 - 0.75 * p) * m
        for v in (1, 2, 3):  # X, Z, Y bit codes on qubit q
            P = pauli_matrix(v << (2 * q), n)
            acc = acc + (p / 4) * (P @ m @ P)
        m = acc
        assert m.shape == (d, d)
    return m


def dense_fidelity_purity(rho: np.ndarray, psi: np.ndarray):
    """(fidelity <psi|rho|psi>, purity Tr rho^2) from dense inputs."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    fid = float(np.real(psi.conj() @ rho @ psi))
    pur = float(np.real(np.trace(rho @ rho)))
    return fid, pur


def born_probabilities(rho: np.ndarray) -> np.ndarray:
    return np.clip(np.real(np.diag(rho)), 0.0, None)


def _check_exhaustive(n: int):
    if n > EXHAUSTIVE_MAX_QUBITS:
        raise ValueError(
            f"exhaustive enumeration capped at {EXHAUSTIVE_MAX_QUBITS} qubits"
        )


def exhaustive_global_fidelity_moments(rho: np.ndarray, psi: np.ndarray, n: int):
    """Exact mean and variance of the single-snapshot fidelity estimate.

    Enumerates every n-qubit Clifford U (24 or 11520 of them) and every
    measurement outcome b; the estimator value for a snapshot (U, b) is
    (2^n + 1) |<psi| U^dag |b>|^2 - 1 weighted by Born probability
    <b| U rho U^dag |b>.
    """
    _check_exhaustive(n)
    us = single_qubit_unitaries() if n == 1 else two_qubit_unitaries()
    d = 1 << n
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    m1 = m2 = 0.0
    for U in us:
        probs = born_probabilities(U @ rho @ U.conj().T)
        amps = U.conj().T @ np.eye(d)  # column b = U^dag |b>
        vals = (d + 1) * np.abs(psi.conj() @ amps) ** 2 - 1.0
        m1 += float(probs @ vals)
        m2 += float(probs @ vals ** 2)
    m1 /= len(us)
    m2 /= len(us)
    return m1, m2 - m1 ** 2


def exhaustive_global_pauli_moments(rho: np.ndarray, v: int, n: int):
    """Exact mean/variance of the single-snapshot Pauli estimator.

    Value for snapshot (U, b) is (2^n + 1) <b| U P U^dag |b> with P the
    Hermitian Pauli coded by v.
    """
    _check_exhaustive(n)
    us = single_qubit_unitaries() if n == 1 else two_qubit_unitaries()
    P = pauli_matrix(v, n)
    rho = np.asarray(rho, dtype=complex)
    d = 1 << n
    m1 = m2 = 0.0
    for U in us:
        Ur = U @ rho @ U.conj().T
        probs = born_probabilities(Ur)
        diag = np.real(np.diag(U @ P @ U.conj().T))
        vals = (d + 1) * diag
        m1 += float(probs @ vals)
        m2 += float(probs @ vals ** 2)
    m1 /= len(us)
    m2 /= len(us)
    return m1, m2 - m1 ** 2


def exhaustive_snapshot_mean(rho: np.ndarray, n: int) -> np.ndarray:
    """E over (U, b) of the approximately-inverted snapshot operator.

    Snapshot operator for (U, b) is (2^n + 1) U^dag |b><b| U - I; with the
    exact global inverse its average is rho itself, which is what the
    faithfulness tests pin down.
    """
    _check_exhaustive(n)
    us = single_qubit_unitaries() if n == 1 else two_qubit_unitaries()
    d = 1 << n
    rho = np.asarray(rho, dtype=complex)
    acc = np.zeros((d, d), dtype=complex)
    for U in us:
        probs = born_probabilities(U @ rho @ U.conj().T)
        for b in range(d):
            vb = U.conj().T[:, b]
            acc += probs[b] * ((d + 1) * np.outer(vb, vb.conj()) - np.eye(d))
    return acc / len(us)


def exhaustive_global_purity_moments(rho: np.ndarray, n: int, m_snapshots: int):
    """Exact mean/variance of the pairwise purity estimator, global gates.

    Uses the factorized second moment E[s (x) s] over independent snapshots,
    where s is the snapshot statevector representation; pair value for
    snapshots r != s is (2^n+1)^2 |<b_r| U_r U_s^dag |b_s>|^2 - 2^n - 2.
    """
    _check_exhaustive(n)
    us = single_qubit_unitaries() if n == 1 else two_qubit_unitaries()
    d = 1 << n
    rho = np.asarray(rho, dtype=complex)
    # first and second moments of the snapshot projector |phi><phi|,
    # phi = U^dag |b>, as operators on H and H (x) H
    m1 = np.zeros((d, d), dtype=complex)
    m2 = np.zeros((d * d, d * d), dtype=complex)
    for U in us:
        probs = born_probabilities(U @ rho @ U.conj().T)
        for b in range(d):
            vb = U.conj().T[:, b]
            proj = np.outer(vb, vb.conj())
            m1 += probs[b] * proj
            m2 += probs[b] * np.kron(proj, proj)
    m1 /= len(us)
    m2 /= len(us)
    c2 = (d + 1) ** 2
    # pair statistic X_{rs}: E over independent (r, s)
    # |<b_r|U_r U_s^dag|b_s>|^2 = Tr(proj_r proj_s)
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    e_pair = c2 * float(np.real(np.trace(np.kron(m1, m1) @ swap))) - d - 2
    # kron(P,P)[i1*d+i2, j1*d+j2] = P[i1,j1] P[i2,j2], so EP[i,j,k,l] below
    # is E[P_ij P_kl]
    EP = m2.reshape(d, d, d, d).transpose(0, 2, 1, 3)
    # E[Tr(P_r P_s)^2] = sum_{ijkl} E[P_ij P_kl] E[Q_ji Q_lk]
    s2 = float(np.real(np.einsum("ijkl,jilk->", EP, EP)))
    e_x2 = c2 ** 2 * s2 - 2 * (d + 2) * (e_pair + d + 2) + (d + 2) ** 2
    var_x = e_x2 - e_pair ** 2
    # covariance between pairs sharing one snapshot:
    # E[Tr(P_r P_s) Tr(P_r P_t)] = sum E[P_r,ij P_r,kl] E[P_s,ji] E[P_t,lk]
    cov_shared = c2 ** 2 * float(
        np.real(np.einsum("ijkl,ji,lk->", EP, m1, m1))
    ) - 2 * (d + 2) * (e_pair + d + 2) + (d + 2) ** 2 - e_pair ** 2
    M = m_snapshots
    npairs = M * (M - 1) // 2
    # Var of the symmetrized U-statistic over M snapshots
    var = (var_x + 2 * (M - 2) * cov_shared) / npairs
    return e_pair, var


@lru_cache(maxsize=1)
def four_replica_gate_average() -> np.ndarray:
    """Average of U (x) U* (x) U (x) U* over all 11520 two-qubit Cliffords.

    256x256 real matrix; replica ordering (k1, b1, k2, b2) with each index
    a two-qubit label (qubit 0 leading).
    """
    acc = np.zeros((256, 256))
    for U in two_qubit_unitaries():
        k = np.kron(U, U.conj())
        acc += np.real(np.kron(k, k))
    return acc / 11520.0


def tilde_pair_basis(t0: np.ndarray, t1: np.ndarray) -> np.ndarray:
    """Two-site tilde vectors re-indexed for four_replica_gate_average.

    The 16-dim per-site vectors use replica-interleaved ordering
    (k1, b1, k2, b2) per site; the 256-dim two-qubit replica ordering
    groups the two sites inside each replica index instead.  Returns a
    (4, 256) array whose rows are |t_m t_n> for (m, n) in row-major order.
    """
    T = (t0, t1)
    out = np.zeros((4, 256))
    for m in range(2):
        for nn in range(2):
            v = np.zeros(256)
            for ia in range(16):
                k1a, b1a, k2a, b2a = (ia >> 3) & 1, (ia >> 2) & 1, \
                    (ia >> 1) & 1, ia & 1
                for ib in range(16):
                    k1b, b1b, k2b, b2b = (ib >> 3) & 1, (ib >> 2) & 1, \
                        (ib >> 1) & 1, ib & 1
                    idx = (((2 * k1a + k1b) * 4 + (2 * b1a + b1b)) * 4
                           + (2 * k2a + k2b)) * 4 + (2 * b2a + b2b)
                    v[idx] += T[m][ia] * T[nn][ib]
            out[2 * m + nn] = v
    return out
