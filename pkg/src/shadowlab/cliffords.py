"""Two-qubit Clifford group bookkeeping.

A two-qubit Clifford is identified (up to global phase) by its conjugation
action on the four Pauli generators X0, Z0, X1, Z1.  The linear part of
that action is a 4x4 binary symplectic matrix (720 of them, found by
exhaustive search over GF(2)^{4x4}), and the remaining freedom is one sign
bit per generator image, giving 720 * 16 = 11520 group elements.

Bit layout used throughout: a two-qubit Pauli (modulo phase) is a 4-bit
integer v with bit 0 = x0, bit 1 = z0, bit 2 = x1, bit 3 = z1.  Generator
order is [X0, Z0, X1, Z1], matching those bit positions, so the sign of a
gate with phase_index p acting on input v is base_sign ^ parity(v & p).

The canonical Hermitian representative of v is i^{x.z} X^x Z^z (so Y=iXZ),
and all sign tables are relative to that representative.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def _parity(x: int) -> int:
    return x.bit_count() & 1


def _xz_count(v: int, n: int) -> int:
    """Number of qubits where v has both x and z set (integer, not mod 2)."""
    x = v & _EVEN_MASK(n)
    z = v >> 1
    return (x & z).bit_count()


def _EVEN_MASK(n: int) -> int:
    m = 0
    for j in range(n):
        m |= 1 << (2 * j)
    return m


def symplectic_product(u: int, v: int, n: int) -> int:
    """GF(2) symplectic form <u,v> = sum_j (xu_j zv_j + zu_j xv_j)."""
    even = _EVEN_MASK(n)
    vs = ((v & even) << 1) | ((v >> 1) & even)
    return _parity(u & vs)


@lru_cache(maxsize=None)
def enumerate_symplectic(n: int) -> np.ndarray:
    """All binary symplectic 2n x 2n matrices (n <= 2), brute force.

    Returns an int64 array of shape (count, 2n); row i of a matrix is the
    image of generator i as a 2n-bit integer.  Matrices are sorted by their
    packed integer encoding, which fixes the symplectic_index convention.
    """
    if n not in (1, 2):
        raise ValueError("only n=1,2 supported")
    k = 2 * n
    nb = 1 << k
    sp = np.zeros((nb, nb), dtype=np.uint8)
    for u in range(nb):
        for v in range(nb):
            sp[u, v] = symplectic_product(u, v, n)
    # want <row_i, row_j> == J_ij with J pairing (X_a, Z_a)
    want = np.zeros((k, k), dtype=np.uint8)
    for a in range(n):
        want[2 * a, 2 * a + 1] = want[2 * a + 1, 2 * a] = 1
    mats = []
    for packed in range(nb ** k):
        rows = [(packed >> (k * i)) & (nb - 1) for i in range(k)]
        ok = True
        for i in range(k):
            for j in range(i + 1, k):
                if sp[rows[i], rows[j]] != want[i, j]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            mats.append(rows)
    out = np.array(mats, dtype=np.int64)
    # sort by packed key, rows little-endian
    keys = sum(out[:, i].astype(object) << (k * i) for i in range(k))
    return out[np.argsort(keys, kind="stable")]


def conjugate_table(images, n: int):
    """Action of a Clifford on all 4^n Paulis from its generator images.

    images: sequence of (u_bits, sign_bit) for generators [X0,Z0,X1,Z1,...].
    Returns (out_bits, signs) arrays over input v, where the gate maps the
    Hermitian Pauli(v) to (-1)^signs[v] * Hermitian Pauli(out_bits[v]).
    """
    nb = 1 << (2 * n)
    out = np.zeros(nb, dtype=np.uint8)
    sgn = np.zeros(nb, dtype=np.uint8)
    for v in range(nb):
        # multiply generator images in order X0,X1,...,Z0,Z1,...
        order = [2 * j for j in range(n) if (v >> (2 * j)) & 1]
        order += [2 * j + 1 for j in range(n) if (v >> (2 * j + 1)) & 1]
        acc_bits = 0
        acc_phase = _xz_count(v, n)  # phase of the input representative
        for g in order:
            u, s = images[g]
            # Z^{z_acc} X^{x_u} reorder picks up (-1)^{z_acc . x_u}
            z_acc = (acc_bits >> 1) & _EVEN_MASK(n)
            x_u = u & _EVEN_MASK(n)
            acc_phase += 2 * s + _xz_count(u, n) + 2 * _parity(z_acc & x_u)
            acc_bits ^= u
        acc_phase = (acc_phase - _xz_count(acc_bits, n)) % 4
        assert acc_phase % 2 == 0
        out[v] = acc_bits
        sgn[v] = acc_phase // 2
    return out, sgn


@dataclass(frozen=True)
class CliffordGateId:
    """Identifier for one of the 11520 two-qubit Cliffords.

    symplectic_index in [0, 720) selects the linear action, phase_index in
    [0, 16) holds the sign bits of the four generator images (bit order
    X0, Z0, X1, Z1).
    """

    symplectic_index: int
    phase_index: int

    def __post_init__(self):
        if not (0 <= self.symplectic_index < 720 and 0 <= self.phase_index < 16):
            raise ValueError("gate id out of range")

    @property
    def index(self) -> int:
        return self.symplectic_index * 16 + self.phase_index

    @classmethod
    def from_index(cls, idx: int) -> "CliffordGateId":
        return cls(idx // 16, idx % 16)


class GateTables:
    """Precomputed action tables for the whole two-qubit Clifford group."""

    def __init__(self):
        mats = enumerate_symplectic(2)
        assert mats.shape == (720, 4)
        self.sp_mats = mats
        self.class_lookup = {
            tuple(int(b) for b in mats[s]): s for s in range(720)
        }
        out = np.zeros((720, 16), dtype=np.uint8)
        sgn = np.zeros((720, 16), dtype=np.uint8)
        for s in range(720):
            imgs = [(int(mats[s, i]), 0) for i in range(4)]
            out[s], sgn[s] = conjugate_table(imgs, 2)
        self.out_bits = out          # (720, 16) linear action
        self.base_sign = sgn         # (720, 16) signs at phase_index 0
        # linear masks: output bit o of v is parity(v & lin[s, o])
        lin = np.zeros((720, 4), dtype=np.uint8)
        for o in range(4):
            for i in range(4):
                lin[:, o] |= (((out[:, 1 << i] >> o) & 1) << i).astype(np.uint8)
        self.lin_masks = lin
        # ANF (Reed-Muller) monomial masks of the base sign function
        anf = sgn.copy().astype(np.uint16)
        for i in range(4):
            lo = np.arange(16) & (1 << i) == 0
            anf[:, ~lo] ^= anf[:, lo]
        self.anf_base = np.array(
            [sum(int(anf[s, m]) << m for m in range(16)) for s in range(720)],
            dtype=np.uint16,
        )
        self.inverse_id = self._build_inverse_ids()
        self._named = None

    def _build_inverse_ids(self) -> np.ndarray:
        inv = np.zeros(11520, dtype=np.int32)
        e = [1, 2, 4, 8]
        for s in range(720):
            perm = self.out_bits[s]
            # u[i]: preimage of generator e_i
            iperm = np.zeros(16, dtype=np.int64)
            iperm[perm] = np.arange(16)
            u = [int(iperm[e[i]]) for i in range(4)]
            si = self.class_lookup[tuple(u)]
            base_u = [int(self.base_sign[s, u[i]]) for i in range(4)]
            base_e = [int(self.base_sign[si, e[i]]) for i in range(4)]
            for p in range(16):
                pp = 0
                for i in range(4):
                    bit = base_u[i] ^ _parity(u[i] & p) ^ base_e[i]
                    pp |= bit << i
                inv[s * 16 + p] = si * 16 + pp
        return inv

    def encode(self, images) -> int:
        """Gate index from generator images [(bits, sign)] * 4."""
        key = tuple(int(b) for b, _ in images)
        s = self.class_lookup[key]
        # phase bits: sign at e_i relative to the class base sign
        p = 0
        for i, (_, sbit) in enumerate(images):
            p |= (int(sbit) ^ int(self.base_sign[s, 1 << i])) << i
        return s * 16 + p

    def decode(self, index: int):
        """Generator images [(bits, sign)] * 4 of a gate index."""
        s, p = index // 16, index % 16
        return [
            (int(self.sp_mats[s, i]),
             int(self.base_sign[s, 1 << i]) ^ ((p >> i) & 1))
            for i in range(4)
        ]

    def sign(self, index: int, v: int) -> int:
        s, p = index // 16, index % 16
        return int(self.base_sign[s, v]) ^ _parity(v & p)

    def act(self, index: int, v: int):
        """(out_bits, sign) of gate `index` acting on Pauli bits v."""
        return int(self.out_bits[index // 16, v]), self.sign(index, v)

    @property
    def named(self) -> dict:
        """Gate indices of common named gates."""
        if self._named is None:
            E = _EVEN_MASK  # noqa: F841  (clarity only)
            X0, Z0, X1, Z1 = 1, 2, 4, 8
            defs = {
                "I": [(X0, 0), (Z0, 0), (X1, 0), (Z1, 0)],
                "CNOT01": [(X0 | X1, 0), (Z0, 0), (X1, 0), (Z0 | Z1, 0)],
                "CNOT10": [(X0, 0), (Z0 | Z1, 0), (X0 | X1, 0), (Z1, 0)],
                "CZ": [(X0 | Z1, 0), (Z0, 0), (Z0 | X1, 0), (Z1, 0)],
                "SWAP": [(X1, 0), (Z1, 0), (X0, 0), (Z0, 0)],
                "H0": [(Z0, 0), (X0, 0), (X1, 0), (Z1, 0)],
                "H1": [(X0, 0), (Z0, 0), (Z1, 0), (X1, 0)],
                "S0": [(X0 | Z0, 0), (Z0, 0), (X1, 0), (Z1, 0)],
                "S1": [(X0, 0), (Z0, 0), (X1 | Z1, 0), (Z1, 0)],
                "X0": [(X0, 0), (Z0, 1), (X1, 0), (Z1, 0)],
                "X1": [(X0, 0), (Z0, 0), (X1, 0), (Z1, 1)],
                "Z0": [(X0, 1), (Z0, 0), (X1, 0), (Z1, 0)],
                "Z1": [(X0, 0), (Z0, 0), (X1, 1), (Z1, 0)],
            }
            self._named = {k: self.encode(v) for k, v in defs.items()}
        return self._named


_TABLES = None


def gate_tables() -> GateTables:
    global _TABLES
    if _TABLES is None:
        _TABLES = GateTables()
    return _TABLES


@lru_cache(maxsize=None)
def single_qubit_tables():
    """Action tables for the 24 single-qubit Cliffords (6 classes x 4 signs).

    Returns (out_bits (6,4), base_sign (6,4)); gate id = class * 4 + phase,
    sign at input v is base_sign ^ parity(v & phase).
    """
    mats = enumerate_symplectic(1)
    assert mats.shape == (6, 2)
    out = np.zeros((6, 4), dtype=np.uint8)
    sgn = np.zeros((6, 4), dtype=np.uint8)
    for s in range(6):
        imgs = [(int(mats[s, i]), 0) for i in range(2)]
        out[s], sgn[s] = conjugate_table(imgs, 1)
    return out, sgn


@lru_cache(maxsize=None)
def single_qubit_named():
    """Single-qubit gate ids (class*4+phase) for named gates."""
    mats = enumerate_symplectic(1)
    lookup = {tuple(int(b) for b in mats[s]): s for s in range(6)}
    out, sgn = single_qubit_tables()

    def enc(images):
        s = lookup[tuple(b for b, _ in images)]
        p = 0
        for i, (_, sb) in enumerate(images):
            p |= (sb ^ int(sgn[s, 1 << i])) << i
        return s * 4 + p

    X, Z = 1, 2
    return {
        "I": enc([(X, 0), (Z, 0)]),
        "H": enc([(Z, 0), (X, 0)]),
        "S": enc([(X | Z, 0), (Z, 0)]),
        "X": enc([(X, 0), (Z, 1)]),
        "Y": enc([(X, 1), (Z, 1)]),
        "Z": enc([(X, 1), (Z, 0)]),
    }
