"""Snapshot collection and the three approximate estimators.

A snapshot is a (circuit plan, measurement outcome) pair; plans are
re-derived from stored seeds so archives stay compact and replay is exact.
Per-snapshot randomness is drawn from counter-based streams keyed as
hash(master_seed, realization_index, snapshot_index), so realizations are
independent and extending R never perturbs earlier ones.

Two evaluation paths exist for each estimator: a readable per-snapshot
path built on StabilizerTableau (this module's public functions) and the
compiled batch drivers (collect_*_series) used for production runs; both
evaluate the identical term sequence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .architectures import ARCH_CODES, CircuitPlan, build_circuit
from .pauli import PauliString
from .tableau import StabilizerTableau, noise_thresholds, prepare

DEFAULT_M = 50
DEFAULT_R = {"fidelity": 9600, "purity": 90000, "pauli": 36000}
DEFAULT_B = 100


def snapshot_key(master_seed: int, realization: int, snapshot: int) -> int:
    """Root key of the (realization, snapshot) RNG stream."""
    return int(K._mix3(np.uint64(master_seed & (2 ** 64 - 1)),
                       np.uint64(realization), np.uint64(snapshot)))


def derived_keys(skey: int):
    """(plan_seed, noise_key, measurement_key) for a snapshot root key."""
    s = np.uint64(skey & (2 ** 64 - 1))
    return (int(K._mix2(s, np.uint64(1))),
            int(K._mix2(s, np.uint64(2))),
            int(K._mix2(s, np.uint64(3))))


def parse_noise(noise):
    """noise spec -> depolarizing strength p (0.0 for none)."""
    if noise in (None, "none", ("none",)):
        return 0.0
    if isinstance(noise, (tuple, list)) and noise[0] == "depolarizing":
        p = float(noise[1])
    elif isinstance(noise, str) and noise.startswith("depolarizing"):
        p = float(noise.split("(", 1)[1].rstrip(")"))
    else:
        raise ValueError(f"unknown noise spec {noise!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing strength must lie in [0, 1]")
    return p


@dataclass(frozen=True)
class Snapshot:
    """One randomized measurement: plan identity plus outcome bits."""
    architecture: str
    n: int
    depth: int
    plan_seed: int
    outcome: np.ndarray = field(repr=False)  # uint8 (n,)

    def plan(self) -> CircuitPlan:
        return build_circuit(self.architecture, self.n, self.depth,
                             self.plan_seed)

    def outcome_mask(self) -> int:
        m = 0
        for q in range(self.n):
            m |= int(self.outcome[q]) << q
        return m


def collect_snapshot(state_spec, noise, plan: CircuitPlan,
                     rng_stream: int) -> Snapshot:
    """Prepare, apply one noise trajectory, randomize, measure."""
    tab = prepare(state_spec, plan.n)
    p = parse_noise(noise)
    _, noise_key, meas_key = derived_keys(rng_stream)
    if p > 0.0:
        tab.apply_depolarizing_trajectory(p, noise_key)
    tab.apply_plan(plan)
    bits = tab.measure_all_z(meas_key)
    return Snapshot(plan.architecture, plan.n, plan.depth, plan.seed, bits)


def collect_snapshots(state_spec, noise, architecture, n, depth,
                      master_seed, realization, m_snapshots):
    """The M snapshots of one estimator realization."""
    out = []
    for m in range(m_snapshots):
        skey = snapshot_key(master_seed, realization, m)
        plan_seed, _, _ = derived_keys(skey)
        plan = build_circuit(architecture, n, depth, plan_seed)
        out.append(collect_snapshot(state_spec, noise, plan, skey))
    return out


# ---------------------------------------------------------------------------
# estimators (per-snapshot reference path)
# ---------------------------------------------------------------------------

def fidelity_estimate(snapshots, target: StabilizerTableau) -> float:
    """(1/M) sum_r [(2^N+1) |<b_r| U_r |target>|^2 - 1]."""
    n = target.n
    d1 = 2.0 ** n + 1.0
    acc = 0.0
    for snap in snapshots:
        if snap.n != n:
            raise ValueError("snapshot/target qubit counts differ")
        evolved = target.copy().apply_plan(snap.plan())
        term = d1 * evolved.basis_overlap_sq(snap.outcome_mask()) - 1.0
        assert -1.0 <= term <= 2.0 ** n
        acc += term
    return acc / len(snapshots)


def _inverse_image(snap: Snapshot) -> StabilizerTableau:
    """phi_r = U_r^dag |b_r> as a tableau."""
    tab = StabilizerTableau.basis_state(snap.n, snap.outcome_mask())
    tab.apply_plan(snap.plan(), inverse=True)
    return tab


def purity_estimate(snapshots) -> float:
    """Pairwise purity estimator over M >= 2 independent snapshots.

    [M(M-1)]^{-1} sum_{r != s} [(2^N+1)^2 |<b_r|U_r U_s^dag|b_s>|^2
    - 2^N - 2]; the squared amplitude equals |<phi_r|phi_s>|^2 with
    phi = U^dag |b>.
    """
    m = len(snapshots)
    if m < 2:
        raise ValueError("purity estimator needs M >= 2 snapshots")
    n = snapshots[0].n
    d = 2.0 ** n
    phis = [_inverse_image(s) for s in snapshots]
    acc = 0.0
    for r in range(m):
        for s in range(r + 1, m):
            acc += (d + 1.0) ** 2 * phis[r].overlap_sq(phis[s]) - d - 2.0
    return 2.0 * acc / (m * (m - 1))


def pauli_estimate(snapshots, pauli: PauliString) -> float:
    """(1/M) sum_r (2^N+1) <b_r| U_r P U_r^dag |b_r>."""
    if pauli.x_bits == 0 and pauli.z_bits == 0:
        raise ValueError("P must be traceless; identity has trace 2^N")
    if not pauli.is_hermitian():
        raise ValueError("P must be Hermitian")
    n = pauli.n
    d1 = 2.0 ** n + 1.0
    W = (n + 63) >> 6
    acc = 0.0
    for snap in snapshots:
        plan = snap.plan()
        cx = np.zeros(W, dtype=np.uint64)
        cz = np.zeros(W, dtype=np.uint64)
        for q in range(n):
            cx[q >> 6] |= np.uint64(((pauli.x_bits >> q) & 1)) << np.uint64(q & 63)
            cz[q >> 6] |= np.uint64(((pauli.z_bits >> q) & 1)) << np.uint64(q & 63)
        sign = (pauli.phase_power2() // 2) ^ K._conjugate_pauli_plan(
            cx, cz, plan.depth, plan.pairs, plan.npairs, plan.gate_ids,
            False, W)
        if int(cx.max()) != 0:
            continue  # conjugated Pauli has X support: <b|..|b> = 0
        par = 0
        bmask = snap.outcome_mask()
        for q in range(n):
            par ^= ((int(cz[q >> 6]) >> (q & 63)) & 1) & ((bmask >> q) & 1)
        acc += d1 * (1.0 - 2.0 * (sign ^ par))
    return acc / len(snapshots)


# ---------------------------------------------------------------------------
# batch drivers
# ---------------------------------------------------------------------------

def _templates(state_spec, target_spec, n):
    lab = prepare(state_spec, n)
    tgt = prepare(target_spec, n) if target_spec is not None else None
    return lab, tgt


def collect_fidelity_series(state_spec, target_spec, noise, architecture,
                            n, depth, master_seed, m_snapshots, r_count):
    """R realizations of the fidelity estimator (compiled path)."""
    lab, tgt = _templates(state_spec, target_spec, n)
    tx, ty, tz = noise_thresholds(parse_noise(noise))
    out = np.empty(r_count)
    bad = K._fidelity_batch(n, depth, ARCH_CODES[architecture],
                            np.uint64(master_seed & (2 ** 64 - 1)),
                            m_snapshots, r_count, tx, ty, tz,
                            lab.x, lab.z, lab.r, tgt.x, tgt.z, tgt.r, out)
    if bad:
        raise FloatingPointError(f"{bad} fidelity terms outside [-1, 2^N]")
    return out


def collect_purity_series(state_spec, noise, architecture, n, depth,
                          master_seed, m_snapshots, r_count):
    lab = prepare(state_spec, n)
    tx, ty, tz = noise_thresholds(parse_noise(noise))
    out = np.empty(r_count)
    K._purity_batch(n, depth, ARCH_CODES[architecture],
                    np.uint64(master_seed & (2 ** 64 - 1)),
                    m_snapshots, r_count, tx, ty, tz,
                    lab.x, lab.z, lab.r, out)
    return out


def collect_pauli_series(state_spec, pauli: PauliString, noise, architecture,
                         n, depth, master_seed, m_snapshots, r_count):
    lab = prepare(state_spec, n)
    tx, ty, tz = noise_thresholds(parse_noise(noise))
    W = (n + 63) >> 6
    opx = np.zeros(W, dtype=np.uint64)
    opz = np.zeros(W, dtype=np.uint64)
    for q in range(n):
        opx[q >> 6] |= np.uint64((pauli.x_bits >> q) & 1) << np.uint64(q & 63)
        opz[q >> 6] |= np.uint64((pauli.z_bits >> q) & 1) << np.uint64(q & 63)
    out = np.empty(r_count)
    K._pauli_batch(n, depth, ARCH_CODES[architecture],
                   np.uint64(master_seed & (2 ** 64 - 1)),
                   m_snapshots, r_count, tx, ty, tz,
                   lab.x, lab.z, lab.r, opx, opz,
                   pauli.phase_power2() // 2, out)
    return out


def collect_outcomes_fast(state_spec, noise, architecture, n, depth,
                          master_seed, count):
    """Bulk snapshot outcomes on the bitsliced columnar path.

    Returns packed outcome words, uint64 (count, ceil(N/64)); snapshot s
    uses the same derived streams as realization index s, snapshot 0.
    """
    lab = prepare(state_spec, n)
    tx, ty, tz = noise_thresholds(parse_noise(noise))
    Wq = (n + 63) >> 6
    out_b = np.empty((count, Wq), dtype=np.uint64)
    # stabilizer rows only, re-sliced to qubit-major bit columns
    Wr = (n + 63) >> 6
    xc0 = np.zeros((n, Wr), dtype=np.uint64)
    zc0 = np.zeros((n, Wr), dtype=np.uint64)
    r0 = np.zeros(Wr, dtype=np.uint64)
    K._transpose_bits(lab.x[n:], xc0, n, n)
    K._transpose_bits(lab.z[n:], zc0, n, n)
    for i in range(n):
        r0[i >> 6] |= np.uint64(int(lab.r[n + i])) << np.uint64(i & 63)
    K._snapshot_batch_columnar(xc0, zc0, r0, n, depth,
                               ARCH_CODES[architecture],
                               np.uint64(master_seed & (2 ** 64 - 1)),
                               tx, ty, tz, count, out_b)
    return out_b


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateSeries:
    values: np.ndarray = field(repr=False)
    m_snapshots: int
    r_count: int
    b_resamples: int
    mean: float
    stderr: float
    sample_variance: float
    variance_err: float


def batch_statistics(values, b_resamples: int = DEFAULT_B,
                     m_snapshots: int = 0,
                     bootstrap_seed: int = 0) -> EstimateSeries:
    """Mean, stderr = sqrt(S^2/R), S^2, and bootstrap spread of S^2."""
    values = np.asarray(values, dtype=float)
    r = values.size
    if r < 2:
        raise ValueError("need R >= 2 realizations")
    if b_resamples < 2:
        raise ValueError("need B >= 2 bootstrap resamples")
    mean = float(values.mean())
    s2 = float(values.var(ddof=1))
    rng = np.random.default_rng(bootstrap_seed)
    boot = np.empty(b_resamples)
    for b in range(b_resamples):
        boot[b] = values[rng.integers(0, r, size=r)].var(ddof=1)
    return EstimateSeries(values, m_snapshots, r, b_resamples, mean,
                          math.sqrt(s2 / r), s2, float(boot.std(ddof=1)))


# ---------------------------------------------------------------------------
# snapshot archives
# ---------------------------------------------------------------------------

def _bits_to_hex(bits: np.ndarray) -> str:
    m = 0
    for q in range(bits.size):
        m |= int(bits[q]) << q
    width = (bits.size + 3) // 4
    return f"{m:0{width}x}"


def save_snapshots(path, snapshots):
    """Write newline-delimited JSON records, one per snapshot."""
    with open(path, "w") as fh:
        for s in snapshots:
            fh.write(json.dumps({
                "architecture": s.architecture, "N": s.n, "t": s.depth,
                "seed": s.plan_seed, "b_hex": _bits_to_hex(s.outcome),
            }) + "\n")


def load_snapshots(path):
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            n = int(rec["N"])
            m = int(rec["b_hex"], 16)
            bits = np.array([(m >> q) & 1 for q in range(n)], dtype=np.uint8)
            out.append(Snapshot(rec["architecture"], n, int(rec["t"]),
                                int(rec["seed"]), bits))
    return out
