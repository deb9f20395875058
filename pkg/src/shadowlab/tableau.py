"""Bit-packed stabilizer tableau with destabilizers.

Rows 0..N-1 are destabilizers, rows N..2N-1 stabilizers; destabilizer i
anticommutes with stabilizer i and commutes with every other row.  All gate
application and measurement work happens in the numba kernels; this module
provides construction, state preparation, and a value-like API.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .cliffords import CliffordGateId, single_qubit_named, single_qubit_tables
from .pauli import PauliString


def _words(n: int) -> int:
    return (n + 63) >> 6


def _mask_to_words(mask: int, W: int) -> np.ndarray:
    out = np.zeros(W, dtype=np.uint64)
    for w in range(W):
        out[w] = (mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def _words_to_mask(words: np.ndarray) -> int:
    out = 0
    for w, v in enumerate(words):
        out |= int(v) << (64 * w)
    return out


def noise_thresholds(p: float):
    """Cumulative uint64 thresholds for the X/Y/Z branches of the trajectory.

    Each Pauli kick has probability p/4 (identity keeps 1 - 3p/4).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    ts = []
    for kcum in (1, 2, 3):
        t = int(round(kcum * (p / 4.0) * 2.0 ** 64))
        ts.append(np.uint64(min(t, 2 ** 64 - 1)))
    return ts[0], ts[1], ts[2]


class StabilizerTableau:
    __slots__ = ("n", "W", "x", "z", "r")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.W = _words(n)
        self.x = np.zeros((2 * n, self.W), dtype=np.uint64)
        self.z = np.zeros((2 * n, self.W), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "StabilizerTableau":
        t = cls(n)
        for q in range(n):
            wq, bq = q >> 6, q & 63
            t.x[q, wq] = np.uint64(1) << np.uint64(bq)
            t.z[n + q, wq] = np.uint64(1) << np.uint64(bq)
        return t

    @classmethod
    def basis_state(cls, n: int, bits: int) -> "StabilizerTableau":
        t = cls.zero(n)
        for q in range(n):
            t.r[n + q] = (bits >> q) & 1
        return t

    @classmethod
    def ghz(cls, n: int) -> "StabilizerTableau":
        """GHZ state: stabilized by X^{(x)N} and Z_i Z_{i+1}."""
        t = cls.zero(n)
        if n == 1:
            t.apply_1q("H", 0)
            return t
        full = (1 << n) - 1
        t._set_row(n + 0, full, 0, 0)          # X...X
        t._set_row(0, 0, 1, 0)                 # destab Z_0
        for i in range(1, n):
            t._set_row(n + i, 0, 0b11 << (i - 1), 0)   # Z_{i-1} Z_i
            t._set_row(i, full & ~((1 << i) - 1), 0, 0)  # X_i ... X_{N-1}
        return t

    @classmethod
    def cluster2d(cls, n: int) -> "StabilizerTableau":
        """2D cluster state on an L x L grid (N = L^2): |+>^N plus CZ edges."""
        L = int(np.sqrt(n) + 0.5)
        if L * L != n or L < 2:
            raise ValueError("cluster2d requires N = L^2 with L >= 2")
        t = cls.zero(n)
        for q in range(n):
            t.apply_1q("H", q)
        from .cliffords import gate_tables
        cz = gate_tables().named["CZ"]
        for i in range(L):
            for j in range(L):
                if j + 1 < L:
                    t.apply_gate(cz, (i * L + j, i * L + j + 1))
                if i + 1 < L:
                    t.apply_gate(cz, (i * L + j, (i + 1) * L + j))
        return t

    @classmethod
    def random_stabilizer(cls, n: int, tau: int, seed: int,
                          iid: bool = False) -> "StabilizerTableau":
        """Short-range-entangled random stabilizer state.

        Depth-tau chain brickwork applied to |0>^N.  By default one gate is
        drawn from the seed and repeated at every location; iid=True draws
        an independent gate per location instead.
        """
        from .architectures import build_circuit
        t = cls.zero(n)
        plan = build_circuit("chain1d", n, tau, seed)
        if not iid:
            gid = np.empty(1, dtype=np.int64)
            K._sample_gate_ids(np.uint64(seed & (2 ** 64 - 1)), 1, gid)
            plan.gate_ids[:] = gid[0]
        t.apply_plan(plan)
        return t

    def _set_row(self, i: int, xmask: int, zmask: int, sign: int):
        self.x[i] = _mask_to_words(xmask, self.W)
        self.z[i] = _mask_to_words(zmask, self.W)
        self.r[i] = sign

    def copy(self) -> "StabilizerTableau":
        t = StabilizerTableau.__new__(StabilizerTableau)
        t.n = self.n
        t.W = self.W
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # -- gates and noise ----------------------------------------------------

    def apply_gate(self, gate, pair):
        a, b = pair
        if a == b or not (0 <= a < self.n and 0 <= b < self.n):
            raise ValueError("invalid qubit pair")
        idx = gate.index if isinstance(gate, CliffordGateId) else int(gate)
        K._apply_gate2_rows(self.x, self.z, self.r, 2 * self.n, a, b,
                            idx >> 4, idx & 15, K.OUT720, K.SIGN720)
        return self

    def apply_1q(self, name: str, q: int):
        idx = single_qubit_named()[name]
        out_t, sgn_t = single_qubit_tables()
        s, p = idx // 4, idx % 4
        out4 = np.ascontiguousarray(out_t[s])
        sgn4 = np.array([sgn_t[s, v] ^ ((v & p).bit_count() & 1)
                         for v in range(4)], dtype=np.uint8)
        K._apply_gate1_rows(self.x, self.z, self.r, 2 * self.n, q, out4, sgn4)
        return self

    def apply_plan(self, plan, inverse: bool = False):
        K._apply_plan_rows(self.x, self.z, self.r, 2 * self.n, self.W,
                           plan.depth, plan.pairs, plan.npairs,
                           plan.gate_ids, inverse)
        return self

    def apply_pauli(self, pauli: PauliString):
        """Conjugate the state by a Pauli (signs flip where anticommuting)."""
        for q in range(self.n):
            xb = (pauli.x_bits >> q) & 1
            zb = (pauli.z_bits >> q) & 1
            if xb and zb:
                K._apply_pauli_flips(self.x, self.z, self.r, 2 * self.n, q, 1)
            elif xb:
                K._apply_pauli_flips(self.x, self.z, self.r, 2 * self.n, q, 0)
            elif zb:
                K._apply_pauli_flips(self.x, self.z, self.r, 2 * self.n, q, 2)
        return self

    def apply_depolarizing_trajectory(self, p: float, key: int):
        """One sampled Pauli-kick trajectory of the depolarizing channel."""
        tx, ty, tz = noise_thresholds(p)
        if tz != 0:
            K._apply_noise_rows(self.x, self.z, self.r, 2 * self.n, self.n,
                                np.uint64(key & (2 ** 64 - 1)), tx, ty, tz)
        return self

    # -- measurement and overlaps -------------------------------------------

    def measure_all_z(self, key: int) -> np.ndarray:
        """Sample b ~ |<b|state>|^2; collapses the tableau to |b>."""
        bw = np.empty(self.W, dtype=np.uint64)
        K._sample_z_outcome(self.x[self.n:], self.z[self.n:], self.r[self.n:],
                            self.n, self.W, np.uint64(key & (2 ** 64 - 1)),
                            np.uint64(0), bw)
        K._collapse_to_basis(self.x, self.z, self.r, self.n, self.W, bw)
        bits = np.empty(self.n, dtype=np.uint8)
        for q in range(self.n):
            bits[q] = (int(bw[q >> 6]) >> (q & 63)) & 1
        return bits

    def overlap_sq(self, other: "StabilizerTableau") -> float:
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        o = other.copy()
        return float(K._overlap_sq(self.x, self.z, self.r, o.x, o.z, o.r,
                                   self.n, self.W))

    def basis_overlap_sq(self, bits: int) -> float:
        """|<b|state>|^2 for a basis state given as an integer bit mask."""
        t = self.copy()
        bw = _mask_to_words(bits, self.W)
        return float(K._basis_overlap_sq(t.x, t.z, t.r, self.n, self.W, bw))

    def expectation_sign(self, pauli: PauliString):
        """<P> for a Hermitian Pauli: +1, -1 or 0."""
        if not pauli.is_hermitian():
            raise ValueError("Pauli must be Hermitian")
        t = self.copy()
        px = _mask_to_words(pauli.x_bits, self.W)
        pz = _mask_to_words(pauli.z_bits, self.W)
        pr = pauli.phase_power2() // 2
        out, det = K._measure_pauli(t.x, t.z, t.r, self.n, self.W,
                                    px, pz, pr, 0)
        if not det:
            return 0
        return 1 if out == 0 else -1

    def stabilizes(self, pauli: PauliString) -> bool:
        return self.expectation_sign(pauli) == 1

    def stabilizer_rows(self):
        """Stabilizer generators as PauliStrings (exact signs)."""
        rows = []
        for i in range(self.n, 2 * self.n):
            xm = _words_to_mask(self.x[i])
            zm = _words_to_mask(self.z[i])
            ph = ((xm & zm).bit_count() + 2 * int(self.r[i])) % 4
            rows.append(PauliString(self.n, xm, zm, ph))
        return rows

    def verify_symplectic(self) -> bool:
        """Destab/stab pairing and commutation structure hold exactly."""
        n = self.n
        for i in range(2 * n):
            for j in range(i + 1, 2 * n):
                s = 0
                for w in range(self.W):
                    s += (int(self.x[i, w]) & int(self.z[j, w])).bit_count()
                    s += (int(self.z[i, w]) & int(self.x[j, w])).bit_count()
                want = 1 if (j == i + n) else 0
                if s % 2 != want:
                    return False
        return True


def prepare(state_spec, n: int) -> StabilizerTableau:
    """Build a named stabilizer state.

    state_spec: "zero" | "ghz" | "cluster2d" | ("random_stabilizer", tau,
    seed) or the string "random_stabilizer(tau,seed)".
    """
    if isinstance(state_spec, (tuple, list)):
        kind, *args = state_spec
    else:
        kind, args = str(state_spec), []
        if "(" in kind:
            base, argstr = kind.split("(", 1)
            kind = base.strip()
            args = [float(a) if "." in a else int(a)
                    for a in argstr.rstrip(")").split(",") if a.strip()]
    if kind == "zero":
        return StabilizerTableau.zero(n)
    if kind == "ghz":
        return StabilizerTableau.ghz(n)
    if kind == "cluster2d":
        return StabilizerTableau.cluster2d(n)
    if kind == "random_stabilizer":
        tau, seed = int(args[0]), int(args[1])
        return StabilizerTableau.random_stabilizer(n, tau, seed)
    raise ValueError(f"unknown state spec {state_spec!r}")
