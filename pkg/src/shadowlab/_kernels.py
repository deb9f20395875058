"""Numba kernels: packed-tableau operations, RNG streams, batch drivers.

Representation: a tableau with `nrows` generator rows over N qubits stores
x and z bitmasks as uint64[nrows, W] (W = ceil(N/64), qubit q at word q>>6
bit q&63) plus a sign byte per row.  Row i encodes (-1)^{r_i} times the
canonical Hermitian Pauli i^{x.z} X^x Z^z.  A full tableau has 2N rows
(destabilizers first), a stab-only tableau has N rows.

Randomness is counter-based splitmix64: every consumer derives its own
stream key by hashing (master_seed, indices...), so runs are reproducible
and realizations are independent of R.

Gate action tables from `cliffords` are captured as module-level constants
at import time.
"""

import numpy as np
from numba import njit

from .cliffords import gate_tables

_GT = gate_tables()
OUT720 = np.ascontiguousarray(_GT.out_bits)        # (720, 16) uint8
SIGN720 = np.ascontiguousarray(_GT.base_sign)      # (720, 16) uint8
LIN720 = np.ascontiguousarray(_GT.lin_masks)       # (720, 4) uint8
ANF720 = np.ascontiguousarray(_GT.anf_base)        # (720,) uint16
INV720 = np.ascontiguousarray(_GT.inverse_id)      # (11520,) int32

N_GATES = 11520

_PAR16 = np.array([bin(i).count("1") & 1 for i in range(16)], dtype=np.uint8)

u64 = np.uint64
i64 = np.int64

_SM_GAMMA = u64(0x9E3779B97F4A7C15)
_MIX_K1 = u64(0xBF58476D1CE4E5B9)
_MIX_K2 = u64(0x94D049BB133111EB)


@njit(cache=True, inline="always")
def _fin64(z):
    z = u64(z)
    z = (z ^ (z >> u64(30))) * _MIX_K1
    z = (z ^ (z >> u64(27))) * _MIX_K2
    return z ^ (z >> u64(31))


@njit(cache=True, inline="always")
def _rand64(key, ctr):
    """ctr-th output of the splitmix64 stream with the given key."""
    return _fin64(u64(key) + _SM_GAMMA * (u64(ctr) + u64(1)))


@njit(cache=True, inline="always")
def _mix2(a, b):
    return _fin64(_fin64(u64(a) + _SM_GAMMA) ^ (u64(b) * _MIX_K1 + _MIX_K2))


@njit(cache=True, inline="always")
def _mix3(a, b, c):
    return _mix2(_mix2(a, b), c)


@njit(cache=True, inline="always")
def _pc64(x):
    x = u64(x)
    x = x - ((x >> u64(1)) & u64(0x5555555555555555))
    x = (x & u64(0x3333333333333333)) + ((x >> u64(2)) & u64(0x3333333333333333))
    x = (x + (x >> u64(4))) & u64(0x0F0F0F0F0F0F0F0F)
    return (x * u64(0x0101010101010101)) >> u64(56)


# ---------------------------------------------------------------------------
# row-major tableau primitives
# ---------------------------------------------------------------------------

@njit(cache=True)
def _row_mult(x, z, r, hi, pi, W):
    """Row hi <- (row pi) * (row hi), with exact sign tracking."""
    ph = i64(2) * (i64(r[hi]) + i64(r[pi]))
    for w in range(W):
        xp = x[pi, w]
        zp = z[pi, w]
        xh = x[hi, w]
        zh = z[hi, w]
        ph += i64(_pc64(xp & zp)) + i64(_pc64(xh & zh))
        ph += i64(2) * i64(_pc64(zp & xh))
        ph -= i64(_pc64((xp ^ xh) & (zp ^ zh)))
        x[hi, w] = xp ^ xh
        z[hi, w] = zp ^ zh
    ph = ph % 4
    if ph < 0:
        ph += 4
    r[hi] = np.uint8(ph >> 1)


@njit(cache=True)
def _apply_gate2_rows(x, z, r, nrows, a, b, sidx, pidx, out_table, sign_table):
    """Apply a two-qubit Clifford on qubits (a, b) to all rows."""
    wa = a >> 6
    ba = u64(a & 63)
    wb = b >> 6
    bb = u64(b & 63)
    one = u64(1)
    for i in range(nrows):
        vin = i64((x[i, wa] >> ba) & one)
        vin |= i64((z[i, wa] >> ba) & one) << 1
        vin |= i64((x[i, wb] >> bb) & one) << 2
        vin |= i64((z[i, wb] >> bb) & one) << 3
        vo = i64(out_table[sidx, vin])
        r[i] ^= sign_table[sidx, vin] ^ _PAR16[vin & pidx]
        x[i, wa] = (x[i, wa] & ~(one << ba)) | (u64(vo & 1) << ba)
        z[i, wa] = (z[i, wa] & ~(one << ba)) | (u64((vo >> 1) & 1) << ba)
        x[i, wb] = (x[i, wb] & ~(one << bb)) | (u64((vo >> 2) & 1) << bb)
        z[i, wb] = (z[i, wb] & ~(one << bb)) | (u64((vo >> 3) & 1) << bb)


@njit(cache=True)
def _apply_gate1_rows(x, z, r, nrows, q, out4, sign4):
    """Apply a single-qubit Clifford action table on qubit q to all rows."""
    wq = q >> 6
    bq = u64(q & 63)
    one = u64(1)
    for i in range(nrows):
        vin = i64((x[i, wq] >> bq) & one)
        vin |= i64((z[i, wq] >> bq) & one) << 1
        vo = i64(out4[vin])
        r[i] ^= sign4[vin]
        x[i, wq] = (x[i, wq] & ~(one << bq)) | (u64(vo & 1) << bq)
        z[i, wq] = (z[i, wq] & ~(one << bq)) | (u64((vo >> 1) & 1) << bq)


@njit(cache=True)
def _apply_plan_rows(x, z, r, nrows, W, depth, pairs, npairs, gids, inverse):
    if inverse:
        for li in range(depth - 1, -1, -1):
            for k in range(npairs[li]):
                g = i64(INV720[gids[li, k]])
                _apply_gate2_rows(x, z, r, nrows,
                                  i64(pairs[li, k, 0]), i64(pairs[li, k, 1]),
                                  g >> 4, g & 15, OUT720, SIGN720)
    else:
        for li in range(depth):
            for k in range(npairs[li]):
                g = i64(gids[li, k])
                _apply_gate2_rows(x, z, r, nrows,
                                  i64(pairs[li, k, 0]), i64(pairs[li, k, 1]),
                                  g >> 4, g & 15, OUT720, SIGN720)


@njit(cache=True)
def _apply_pauli_flips(x, z, r, nrows, q, kind):
    """Apply the Pauli X (kind 0), Y (1), Z (2) on qubit q to the state.

    Conjugating each generator row flips its sign iff it anticommutes with
    the applied Pauli.
    """
    wq = q >> 6
    bq = u64(q & 63)
    one = u64(1)
    for i in range(nrows):
        xb = (x[i, wq] >> bq) & one
        zb = (z[i, wq] >> bq) & one
        if kind == 0:
            flip = zb
        elif kind == 1:
            flip = xb ^ zb
        else:
            flip = xb
        r[i] ^= np.uint8(flip)


@njit(cache=True)
def _apply_noise_rows(x, z, r, nrows, N, key, thr_x, thr_y, thr_z):
    """Depolarizing trajectory: i.i.d. single-qubit Pauli kicks."""
    ctr = u64(0)
    for q in range(N):
        ctr += u64(1)
        u = _rand64(key, ctr)
        if u < thr_x:
            _apply_pauli_flips(x, z, r, nrows, q, 0)
        elif u < thr_y:
            _apply_pauli_flips(x, z, r, nrows, q, 1)
        elif u < thr_z:
            _apply_pauli_flips(x, z, r, nrows, q, 2)


@njit(cache=True)
def _anticommutes(x, z, i, px, pz, W):
    s = u64(0)
    for w in range(W):
        s += _pc64(x[i, w] & pz[w]) + _pc64(z[i, w] & px[w])
    return i64(s) & 1


@njit(cache=True)
def _measure_pauli(x, z, r, N, W, px, pz, pr, forced_bit):
    """Measure the Hermitian operator Q = (-1)^pr * Pauli(px, pz).

    Returns (outcome, determinate).  If the outcome is indeterminate the
    state collapses to the (-1)^forced_bit eigenstate of Q and
    outcome == forced_bit.  Operates on a full 2N-row tableau.
    """
    p = -1
    for i in range(N, 2 * N):
        if _anticommutes(x, z, i, px, pz, W):
            p = i
            break
    if p >= 0:
        for q in range(2 * N):
            if q != p and _anticommutes(x, z, q, px, pz, W):
                _row_mult(x, z, r, q, p, W)
        d = p - N
        for w in range(W):
            x[d, w] = x[p, w]
            z[d, w] = z[p, w]
            x[p, w] = px[w]
            z[p, w] = pz[w]
        r[d] = r[p]
        r[p] = np.uint8((i64(pr) + i64(forced_bit)) & 1)
        return i64(forced_bit), False
    # determinate: P = +/- product of stabilizer generators selected by the
    # destabilizer rows that anticommute with P
    sx = np.zeros(W, dtype=np.uint64)
    sz = np.zeros(W, dtype=np.uint64)
    ph = i64(0)
    for i in range(N):
        if _anticommutes(x, z, i, px, pz, W):
            g = i + N
            ph += i64(2) * i64(r[g])
            for w in range(W):
                xg = x[g, w]
                zg = z[g, w]
                ph += i64(_pc64(sx[w] & sz[w])) + i64(_pc64(xg & zg))
                ph += i64(2) * i64(_pc64(sz[w] & xg))
                ph -= i64(_pc64((sx[w] ^ xg) & (sz[w] ^ zg)))
                sx[w] ^= xg
                sz[w] ^= zg
    ph = ph % 4
    if ph < 0:
        ph += 4
    rs = ph >> 1
    return i64(rs) ^ i64(pr), True


@njit(cache=True)
def _overlap_sq(xa, za, ra, xb, zb, rb, N, W):
    """|<A|B>|^2; the B tableau (full, 2N rows) is consumed."""
    s = 0
    for i in range(N, 2 * N):
        out, det = _measure_pauli(xb, zb, rb, N, W, xa[i], za[i], ra[i], 0)
        if det:
            if out != 0:
                return 0.0
        else:
            s += 1
    return 2.0 ** (-s)


@njit(cache=True)
def _basis_overlap_sq(x, z, r, N, W, bwords):
    """|<b|state>|^2; the full tableau is consumed (collapsed onto |b>)."""
    px = np.zeros(W, dtype=np.uint64)
    pz = np.zeros(W, dtype=np.uint64)
    s = 0
    one = u64(1)
    for q in range(N):
        wq = q >> 6
        bq = u64(q & 63)
        pz[wq] = one << bq
        want = i64((bwords[wq] >> bq) & one)
        # operator (-1)^want Z_q must come out +1 for <b| support
        out, det = _measure_pauli(x, z, r, N, W, px, pz, want, 0)
        pz[wq] = u64(0)
        if det and out != 0:
            return 0.0
        if not det:
            s += 1
    return 2.0 ** (-s)


# ---------------------------------------------------------------------------
# bulk Z-basis sampling via Gaussian elimination on the stabilizer X block
# ---------------------------------------------------------------------------

@njit(cache=True)
def _sample_z_outcome(sx, sz, sr, N, W, key, ctr0, bwords):
    """Sample b ~ |<b|state>|^2 from stab-only rows (sx/sz kept intact).

    The outcome support is an affine subspace: eliminate the X block to
    find the pure-Z group elements, whose signs pin linear constraints on
    b; the remaining bits are uniform.  Sign recovery multiplies original
    rows as tracked by a companion combination matrix, so no phase
    arithmetic happens during elimination.  Returns the updated counter.
    """
    wx = sx.copy()
    comb = np.zeros((N, W), dtype=np.uint64)
    one = u64(1)
    for i in range(N):
        comb[i, i >> 6] = one << u64(i & 63)
    nr = 0  # pivot rows placed so far
    for j in range(N):
        wj = j >> 6
        bj = u64(j & 63)
        piv = -1
        for i in range(nr, N):
            if (wx[i, wj] >> bj) & one:
                piv = i
                break
        if piv < 0:
            continue
        if piv != nr:
            for w in range(W):
                t = wx[piv, w]
                wx[piv, w] = wx[nr, w]
                wx[nr, w] = t
                t = comb[piv, w]
                comb[piv, w] = comb[nr, w]
                comb[nr, w] = t
        for q in range(nr + 1, N):
            if (wx[q, wj] >> bj) & one:
                for w in range(W):
                    wx[q, w] ^= wx[nr, w]
                    comb[q, w] ^= comb[nr, w]
        nr += 1
    k = N - nr  # pure-Z constraint rows
    # random bits for b
    ctr = u64(ctr0)
    for w in range(W):
        ctr += u64(1)
        bwords[w] = _rand64(key, ctr)
    tail = N & 63
    if tail:
        bwords[W - 1] &= (one << u64(tail)) - one
    if k > 0:
        zeta = np.zeros((k, W), dtype=np.uint64)
        rs = np.zeros(k, dtype=np.uint8)
        for c in range(k):
            row = nr + c
            # ordered product of original rows selected by comb[row]
            ph = i64(0)
            ax = np.zeros(W, dtype=np.uint64)
            az = np.zeros(W, dtype=np.uint64)
            for i in range(N):
                if (comb[row, i >> 6] >> u64(i & 63)) & one:
                    ph += i64(2) * i64(sr[i])
                    for w in range(W):
                        xg = sx[i, w]
                        zg = sz[i, w]
                        ph += i64(_pc64(ax[w] & az[w])) + i64(_pc64(xg & zg))
                        ph += i64(2) * i64(_pc64(az[w] & xg))
                        ph -= i64(_pc64((ax[w] ^ xg) & (az[w] ^ zg)))
                        ax[w] ^= xg
                        az[w] ^= zg
            ph = ph % 4
            if ph < 0:
                ph += 4
            for w in range(W):
                zeta[c, w] = az[w]
            rs[c] = np.uint8(ph >> 1)
        # reduce constraints to distinct pivot bits
        pivots = np.empty(k, dtype=np.int64)
        for c in range(k):
            pb = -1
            for j in range(N):
                if (zeta[c, j >> 6] >> u64(j & 63)) & one:
                    pb = j
                    break
            pivots[c] = pb
            for c2 in range(k):
                if c2 != c and ((zeta[c2, pb >> 6] >> u64(pb & 63)) & one):
                    for w in range(W):
                        zeta[c2, w] ^= zeta[c, w]
                    rs[c2] ^= rs[c]
        # enforce zeta . b = rs by fixing the pivot bits
        for c in range(k):
            pb = pivots[c]
            wp = pb >> 6
            bp = u64(pb & 63)
            bwords[wp] &= ~(one << bp)
            par = u64(0)
            for w in range(W):
                par += _pc64(zeta[c, w] & bwords[w])
            bit = (i64(par) & 1) ^ i64(rs[c])
            bwords[wp] |= u64(bit) << bp
    return ctr


@njit(cache=True)
def _collapse_to_basis(x, z, r, N, W, bwords):
    """Rewrite a full tableau as the computational basis state |b>."""
    one = u64(1)
    for i in range(2 * N):
        r[i] = 0
        for w in range(W):
            x[i, w] = u64(0)
            z[i, w] = u64(0)
    for q in range(N):
        wq = q >> 6
        bq = u64(q & 63)
        x[q, wq] = one << bq
        z[N + q, wq] = one << bq
        r[N + q] = np.uint8((bwords[wq] >> bq) & one)


# ---------------------------------------------------------------------------
# circuit plan generation
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gen_plan(arch, N, depth, seed, pairs, npairs, gids):
    """Fill layer structure and gate draws; one splitmix64 stream per plan.

    arch: 0 = chain1d, 1 = grid2d, 2 = alltoall.  Chain layer l pairs
    (j, j+1) for j = l mod 2, l mod 2 + 2, ... (open boundaries); grid
    layer l pairs each site with its neighbor in direction l mod 4 in the
    order right, down, left, up, skipping sites whose neighbor is off the
    lattice; alltoall layers are uniform perfect matchings.
    """
    key = u64(seed)
    ctr = u64(0)
    L = 0
    if arch == 1:
        L = i64(np.sqrt(np.float64(N)) + 0.5)
    perm = np.empty(N, dtype=np.int64)
    for li in range(depth):
        np_ = 0
        if arch == 0:
            j = li & 1
            while j + 1 < N:
                pairs[li, np_, 0] = j
                pairs[li, np_, 1] = j + 1
                np_ += 1
                j += 2
        elif arch == 1:
            d = li & 3
            for i in range(L):
                for j in range(L):
                    if d == 0 and (j & 1) == 0 and j + 1 < L:
                        pairs[li, np_, 0] = i * L + j
                        pairs[li, np_, 1] = i * L + j + 1
                        np_ += 1
                    elif d == 1 and (i & 1) == 0 and i + 1 < L:
                        pairs[li, np_, 0] = i * L + j
                        pairs[li, np_, 1] = (i + 1) * L + j
                        np_ += 1
                    elif d == 2 and (j & 1) == 1 and j + 1 < L:
                        pairs[li, np_, 0] = i * L + j
                        pairs[li, np_, 1] = i * L + j + 1
                        np_ += 1
                    elif d == 3 and (i & 1) == 1 and i + 1 < L:
                        pairs[li, np_, 0] = i * L + j
                        pairs[li, np_, 1] = (i + 1) * L + j
                        np_ += 1
        else:
            for q in range(N):
                perm[q] = q
            for i in range(N - 1, 0, -1):
                ctr += u64(1)
                j = i64(_rand64(key, ctr) % u64(i + 1))
                t = perm[i]
                perm[i] = perm[j]
                perm[j] = t
            for kk in range(N // 2):
                pairs[li, kk, 0] = perm[2 * kk]
                pairs[li, kk, 1] = perm[2 * kk + 1]
                np_ += 1
        npairs[li] = np_
        for kk in range(np_):
            ctr += u64(1)
            gids[li, kk] = i64(_rand64(key, ctr) % u64(N_GATES))


# ---------------------------------------------------------------------------
# columnar (bitsliced) fast path for large-N snapshot collection
# ---------------------------------------------------------------------------

_T64_MASKS = np.array(
    [0x00000000FFFFFFFF, 0x0000FFFF0000FFFF, 0x00FF00FF00FF00FF,
     0x0F0F0F0F0F0F0F0F, 0x3333333333333333, 0x5555555555555555],
    dtype=np.uint64,
)
_T64_SHIFTS = np.array([32, 16, 8, 4, 2, 1], dtype=np.int64)


@njit(cache=True)
def _transpose64(a):
    """In-place transpose of a 64x64 bit block (a: uint64[64])."""
    for lev in range(6):
        j = _T64_SHIFTS[lev]
        m = _T64_MASKS[lev]
        k = 0
        while k < 64:
            t = ((a[k] >> u64(j)) ^ a[k + j]) & m
            a[k] ^= t << u64(j)
            a[k + j] ^= t
            k += 1
            if (k & j) != 0:
                k += j
    return a


@njit(cache=True)
def _transpose_bits(src, dst, nrows, ncols):
    """dst[c] bit r = src[r] bit c, over packed uint64 words."""
    Wc = src.shape[1]
    Wr = dst.shape[1]
    blk = np.empty(64, dtype=np.uint64)
    for bi in range((nrows + 63) >> 6):
        for bj in range(ncols + 63 >> 6):
            for t in range(64):
                rr = (bi << 6) + t
                blk[t] = src[rr, bj] if rr < nrows else u64(0)
            _transpose64(blk)
            for t in range(64):
                cc = (bj << 6) + t
                if cc < ncols:
                    dst[cc, bi] = blk[t]


@njit(cache=True)
def _apply_gate2_cols(xc, zc, rbits, Wr, a, b, sidx, pidx):
    """Bitsliced gate application: qubit-major columns, rows packed in words."""
    lm0 = i64(LIN720[sidx, 0])
    lm1 = i64(LIN720[sidx, 1])
    lm2 = i64(LIN720[sidx, 2])
    lm3 = i64(LIN720[sidx, 3])
    anf = i64(ANF720[sidx])
    # sign bits of the gate enter the ANF as four linear monomials
    anf ^= ((pidx & 1) << 1) | ((pidx & 2) << 1) | ((pidx & 4) << 2) | ((pidx & 8) << 5)
    for w in range(Wr):
        v0 = xc[a, w]
        v1 = zc[a, w]
        v2 = xc[b, w]
        v3 = zc[b, w]
        o0 = u64(0)
        o1 = u64(0)
        o2 = u64(0)
        o3 = u64(0)
        if lm0 & 1:
            o0 ^= v0
        if lm0 & 2:
            o0 ^= v1
        if lm0 & 4:
            o0 ^= v2
        if lm0 & 8:
            o0 ^= v3
        if lm1 & 1:
            o1 ^= v0
        if lm1 & 2:
            o1 ^= v1
        if lm1 & 4:
            o1 ^= v2
        if lm1 & 8:
            o1 ^= v3
        if lm2 & 1:
            o2 ^= v0
        if lm2 & 2:
            o2 ^= v1
        if lm2 & 4:
            o2 ^= v2
        if lm2 & 8:
            o2 ^= v3
        if lm3 & 1:
            o3 ^= v0
        if lm3 & 2:
            o3 ^= v1
        if lm3 & 4:
            o3 ^= v2
        if lm3 & 8:
            o3 ^= v3
        acc = u64(0)
        for m in range(1, 16):
            if (anf >> m) & 1:
                t = ~u64(0)
                if m & 1:
                    t &= v0
                if m & 2:
                    t &= v1
                if m & 4:
                    t &= v2
                if m & 8:
                    t &= v3
                acc ^= t
        rbits[w] ^= acc
        xc[a, w] = o0
        zc[a, w] = o1
        xc[b, w] = o2
        zc[b, w] = o3


@njit(cache=True)
def _snapshot_columnar(xc0, zc0, r0, N, Wr, Wq, depth, pairs, npairs, gids,
                       noise_key, thr_x, thr_y, thr_z,
                       meas_key, xc, zc, rbits, rx, rz, rr, bwords):
    """One snapshot on the columnar fast path.

    xc0/zc0/r0: template stab-only state (qubit-major bitsliced columns and
    row-packed sign words).  Scratch arrays are caller-provided to keep the
    hot loop allocation-free.  Fills bwords with the sampled outcome.
    """
    one = u64(1)
    for q in range(N):
        for w in range(Wr):
            xc[q, w] = xc0[q, w]
            zc[q, w] = zc0[q, w]
    for w in range(Wr):
        rbits[w] = r0[w]
    if thr_z != u64(0):
        ctr = u64(0)
        for q in range(N):
            ctr += u64(1)
            u = _rand64(noise_key, ctr)
            if u < thr_x:
                for w in range(Wr):
                    rbits[w] ^= zc[q, w]
            elif u < thr_y:
                for w in range(Wr):
                    rbits[w] ^= xc[q, w] ^ zc[q, w]
            elif u < thr_z:
                for w in range(Wr):
                    rbits[w] ^= xc[q, w]
    for li in range(depth):
        for k in range(npairs[li]):
            g = i64(gids[li, k])
            _apply_gate2_cols(xc, zc, rbits, Wr,
                              i64(pairs[li, k, 0]), i64(pairs[li, k, 1]),
                              g >> 4, g & 15)
    # to row-major for measurement
    _transpose_bits(xc, rx, N, N)
    _transpose_bits(zc, rz, N, N)
    for i in range(N):
        rr[i] = np.uint8((rbits[i >> 6] >> u64(i & 63)) & one)
    _sample_z_outcome(rx, rz, rr, N, Wq, meas_key, u64(0), bwords)


@njit(cache=True)
def _snapshot_batch_columnar(xc0, zc0, r0, N, depth, arch, master,
                             thr_x, thr_y, thr_z, count, out_b):
    """Collect `count` snapshots (fast path); outcomes into out_b (count, Wq)."""
    Wr = (N + 63) >> 6
    Wq = Wr
    maxp = N // 2
    pairs = np.empty((depth, maxp, 2), dtype=np.int32)
    npairs = np.empty(depth, dtype=np.int32)
    gids = np.empty((depth, maxp), dtype=np.int32)
    xc = np.empty((N, Wr), dtype=np.uint64)
    zc = np.empty((N, Wr), dtype=np.uint64)
    rbits = np.empty(Wr, dtype=np.uint64)
    rx = np.empty((N, Wq), dtype=np.uint64)
    rz = np.empty((N, Wq), dtype=np.uint64)
    rr = np.empty(N, dtype=np.uint8)
    for s in range(count):
        skey = _mix3(master, u64(s), u64(0))
        _gen_plan(arch, N, depth, _mix2(skey, 1), pairs, npairs, gids)
        _snapshot_columnar(xc0, zc0, r0, N, Wr, Wq, depth, pairs, npairs,
                           gids, _mix2(skey, 2), thr_x, thr_y, thr_z,
                           _mix2(skey, 3), xc, zc, rbits, rx, rz, rr,
                           out_b[s])


# ---------------------------------------------------------------------------
# batch estimator drivers (row-major, small/medium N)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _copy_tableau(xs, zs, rs, xd, zd, rd, nrows, W):
    for i in range(nrows):
        rd[i] = rs[i]
        for w in range(W):
            xd[i, w] = xs[i, w]
            zd[i, w] = zs[i, w]


@njit(cache=True)
def _fidelity_batch(N, depth, arch, master, M, R,
                    thr_x, thr_y, thr_z,
                    lx, lz, lr, tx, tz, tr, out):
    """R fidelity-estimator realizations of M snapshots each.

    lx/lz/lr: lab-state template (full tableau); tx/tz/tr: target template.
    Returns the number of per-snapshot terms outside [-1, 2^N].
    """
    W = (N + 63) >> 6
    maxp = max(N // 2, 1)
    pairs = np.empty((depth + 1, maxp, 2), dtype=np.int32)
    npairs = np.empty(depth + 1, dtype=np.int32)
    gids = np.empty((depth + 1, maxp), dtype=np.int32)
    wx = np.empty((2 * N, W), dtype=np.uint64)
    wz = np.empty((2 * N, W), dtype=np.uint64)
    wr = np.empty(2 * N, dtype=np.uint8)
    gx = np.empty((2 * N, W), dtype=np.uint64)
    gz = np.empty((2 * N, W), dtype=np.uint64)
    gr = np.empty(2 * N, dtype=np.uint8)
    bwords = np.empty(W, dtype=np.uint64)
    D1 = 2.0 ** N + 1.0
    bad = 0
    for rr_ in range(R):
        acc = 0.0
        for m in range(M):
            skey = _mix3(master, u64(rr_), u64(m))
            _gen_plan(arch, N, depth, _mix2(skey, 1), pairs, npairs, gids)
            _copy_tableau(lx, lz, lr, wx, wz, wr, 2 * N, W)
            if thr_z != u64(0):
                _apply_noise_rows(wx, wz, wr, 2 * N, N, _mix2(skey, 2),
                                  thr_x, thr_y, thr_z)
            _apply_plan_rows(wx, wz, wr, 2 * N, W, depth, pairs, npairs,
                             gids, False)
            _sample_z_outcome(wx[N:], wz[N:], wr[N:], N, W,
                              _mix2(skey, 3), u64(0), bwords)
            _copy_tableau(tx, tz, tr, gx, gz, gr, 2 * N, W)
            _apply_plan_rows(gx, gz, gr, 2 * N, W, depth, pairs, npairs,
                             gids, False)
            ov = _basis_overlap_sq(gx, gz, gr, N, W, bwords)
            term = D1 * ov - 1.0
            if term < -1.0 or term > D1 - 1.0:
                bad += 1
            acc += term
        out[rr_] = acc / M
    return bad


@njit(cache=True)
def _purity_batch(N, depth, arch, master, M, R,
                  thr_x, thr_y, thr_z, lx, lz, lr, out):
    """R purity-estimator realizations, each from M independent snapshots.

    Pair terms use phi_r = U_r^dag |b_r>: the pairwise squared amplitude
    |<b_r|U_r U_s^dag|b_s>|^2 equals |<phi_r|phi_s>|^2.
    """
    W = (N + 63) >> 6
    maxp = max(N // 2, 1)
    pairs = np.empty((depth + 1, maxp, 2), dtype=np.int32)
    npairs = np.empty(depth + 1, dtype=np.int32)
    gids = np.empty((depth + 1, maxp), dtype=np.int32)
    wx = np.empty((2 * N, W), dtype=np.uint64)
    wz = np.empty((2 * N, W), dtype=np.uint64)
    wr = np.empty(2 * N, dtype=np.uint8)
    px = np.empty((M, 2 * N, W), dtype=np.uint64)
    pz = np.empty((M, 2 * N, W), dtype=np.uint64)
    pr = np.empty((M, 2 * N), dtype=np.uint8)
    sx = np.empty((2 * N, W), dtype=np.uint64)
    sz = np.empty((2 * N, W), dtype=np.uint64)
    sr = np.empty(2 * N, dtype=np.uint8)
    bwords = np.empty(W, dtype=np.uint64)
    D = 2.0 ** N
    c2 = (D + 1.0) ** 2
    for rr_ in range(R):
        for m in range(M):
            skey = _mix3(master, u64(rr_), u64(m))
            _gen_plan(arch, N, depth, _mix2(skey, 1), pairs, npairs, gids)
            _copy_tableau(lx, lz, lr, wx, wz, wr, 2 * N, W)
            if thr_z != u64(0):
                _apply_noise_rows(wx, wz, wr, 2 * N, N, _mix2(skey, 2),
                                  thr_x, thr_y, thr_z)
            _apply_plan_rows(wx, wz, wr, 2 * N, W, depth, pairs, npairs,
                             gids, False)
            _sample_z_outcome(wx[N:], wz[N:], wr[N:], N, W,
                              _mix2(skey, 3), u64(0), bwords)
            # phi_m = U_m^dag |b_m>
            _collapse_to_basis(wx, wz, wr, N, W, bwords)
            _apply_plan_rows(wx, wz, wr, 2 * N, W, depth, pairs, npairs,
                             gids, True)
            _copy_tableau(wx, wz, wr, px[m], pz[m], pr[m], 2 * N, W)
        acc = 0.0
        for r1 in range(M):
            for s1 in range(r1 + 1, M):
                _copy_tableau(px[s1], pz[s1], pr[s1], sx, sz, sr, 2 * N, W)
                ov = _overlap_sq(px[r1], pz[r1], pr[r1], sx, sz, sr, N, W)
                acc += c2 * ov - D - 2.0
        out[rr_] = 2.0 * acc / (M * (M - 1))
    return 0


@njit(cache=True)
def _conjugate_pauli_plan(pxw, pzw, depth, pairs, npairs, gids, inverse, W):
    """Heisenberg-propagate a Pauli through a plan; returns the sign bit."""
    one = u64(1)
    sign = 0
    if inverse:
        l0, l1, dl = depth - 1, -1, -1
    else:
        l0, l1, dl = 0, depth, 1
    li = l0
    while li != l1:
        for k in range(npairs[li]):
            g = i64(gids[li, k])
            if inverse:
                g = i64(INV720[g])
            a = i64(pairs[li, k, 0])
            b = i64(pairs[li, k, 1])
            wa = a >> 6
            ba = u64(a & 63)
            wb = b >> 6
            bb = u64(b & 63)
            vin = i64((pxw[wa] >> ba) & one)
            vin |= i64((pzw[wa] >> ba) & one) << 1
            vin |= i64((pxw[wb] >> bb) & one) << 2
            vin |= i64((pzw[wb] >> bb) & one) << 3
            vo = i64(OUT720[g >> 4, vin])
            sign ^= i64(SIGN720[g >> 4, vin]) ^ i64(_PAR16[vin & (g & 15)])
            pxw[wa] = (pxw[wa] & ~(one << ba)) | (u64(vo & 1) << ba)
            pzw[wa] = (pzw[wa] & ~(one << ba)) | (u64((vo >> 1) & 1) << ba)
            pxw[wb] = (pxw[wb] & ~(one << bb)) | (u64((vo >> 2) & 1) << bb)
            pzw[wb] = (pzw[wb] & ~(one << bb)) | (u64((vo >> 3) & 1) << bb)
        li += dl
    return sign


@njit(cache=True)
def _pauli_batch(N, depth, arch, master, M, R,
                 thr_x, thr_y, thr_z, lx, lz, lr, opx, opz, opsign, out):
    """R Pauli-estimator realizations: mean of (2^N+1) <b|U P U^dag|b>."""
    W = (N + 63) >> 6
    maxp = max(N // 2, 1)
    pairs = np.empty((depth + 1, maxp, 2), dtype=np.int32)
    npairs = np.empty(depth + 1, dtype=np.int32)
    gids = np.empty((depth + 1, maxp), dtype=np.int32)
    wx = np.empty((2 * N, W), dtype=np.uint64)
    wz = np.empty((2 * N, W), dtype=np.uint64)
    wr = np.empty(2 * N, dtype=np.uint8)
    cx = np.empty(W, dtype=np.uint64)
    cz = np.empty(W, dtype=np.uint64)
    bwords = np.empty(W, dtype=np.uint64)
    D1 = 2.0 ** N + 1.0
    for rr_ in range(R):
        acc = 0.0
        for m in range(M):
            skey = _mix3(master, u64(rr_), u64(m))
            _gen_plan(arch, N, depth, _mix2(skey, 1), pairs, npairs, gids)
            _copy_tableau(lx, lz, lr, wx, wz, wr, 2 * N, W)
            if thr_z != u64(0):
                _apply_noise_rows(wx, wz, wr, 2 * N, N, _mix2(skey, 2),
                                  thr_x, thr_y, thr_z)
            _apply_plan_rows(wx, wz, wr, 2 * N, W, depth, pairs, npairs,
                             gids, False)
            _sample_z_outcome(wx[N:], wz[N:], wr[N:], N, W,
                              _mix2(skey, 3), u64(0), bwords)
            for w in range(W):
                cx[w] = opx[w]
                cz[w] = opz[w]
            sign = i64(opsign) ^ _conjugate_pauli_plan(
                cx, cz, depth, pairs, npairs, gids, False, W)
            zonly = True
            for w in range(W):
                if cx[w] != u64(0):
                    zonly = False
            if zonly:
                par = u64(0)
                for w in range(W):
                    par += _pc64(cz[w] & bwords[w])
                s = sign ^ (i64(par) & 1)
                acc += D1 * (1.0 - 2.0 * s)
        out[rr_] = acc / M
    return 0


@njit(cache=True)
def _collision_batch(N, depth, arch, master, R, lx, lz, lr, out):
    """Monte Carlo collision probability: |<0|U|0>|^4 samples."""
    W = (N + 63) >> 6
    maxp = max(N // 2, 1)
    pairs = np.empty((depth + 1, maxp, 2), dtype=np.int32)
    npairs = np.empty(depth + 1, dtype=np.int32)
    gids = np.empty((depth + 1, maxp), dtype=np.int32)
    wx = np.empty((2 * N, W), dtype=np.uint64)
    wz = np.empty((2 * N, W), dtype=np.uint64)
    wr = np.empty(2 * N, dtype=np.uint8)
    bwords = np.zeros(W, dtype=np.uint64)
    for rr_ in range(R):
        skey = _mix3(master, u64(rr_), u64(0))
        _gen_plan(arch, N, depth, _mix2(skey, 1), pairs, npairs, gids)
        _copy_tableau(lx, lz, lr, wx, wz, wr, 2 * N, W)
        _apply_plan_rows(wx, wz, wr, 2 * N, W, depth, pairs, npairs,
                         gids, False)
        p0 = _basis_overlap_sq(wx, wz, wr, N, W, bwords)
        out[rr_] = p0 * p0
    return 0


@njit(cache=True)
def _sample_gate_ids(key, n, out):
    for i in range(n):
        out[i] = i64(_rand64(key, u64(i)) % u64(N_GATES))
