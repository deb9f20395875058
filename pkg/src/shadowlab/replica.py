"""Exact infinite-sample estimator averages via the 4-replica mapping.

Averaging a degree-2 functional of the random circuit maps each two-qubit
gate onto a fixed superoperator acting on two 4-replica sites.  The
relevant per-site subspace is two-dimensional, spanned by the orthonormal
tilde basis built from the identity/swap superstates |I+> and |I->:
|I+> = d |t0>, |I-> = |t0> + sqrt(d^2-1) |t1>, d = 2.

Two engines are provided: a dense 2^N-amplitude propagator for chain1d
(N <= 20) and an (N+1)-dimensional permutation-symmetric W-basis engine for
alltoall (N <= 1024).  Collision probabilities are handled entirely in log
space (all contributions are positive); the purity average subtracts two
near-equal exponentially large numbers, so the W-basis purity path runs in
mpmath with N-adapted precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np

D = 2  # local Hilbert dimension
CHAIN_DENSE_MAX = 20
SYMMETRIC_MAX = 1024

_LN2 = math.log(2.0)
_LN3 = math.log(3.0)
_LN15 = math.log(15.0)


# ---------------------------------------------------------------------------
# per-site embedding
# ---------------------------------------------------------------------------

def site_tilde_vectors():
    """Orthonormal |t0>, |t1> as 16-dim vectors, replica order (k1,b1,k2,b2)."""
    iplus = np.zeros(16)
    iminus = np.zeros(16)
    for i in range(D):
        for j in range(D):
            iplus[i * 8 + i * 4 + j * 2 + j] = 1.0
            iminus[i * 8 + j * 4 + j * 2 + i] = 1.0
    t0 = iplus / D
    t1 = (iminus - iplus / D) / math.sqrt(D * D - 1)
    return t0, t1


def gate_superop_tilde() -> np.ndarray:
    """Averaged two-qubit gate superoperator in the two-site tilde basis.

    The average of U (x) U* (x) U (x) U* over the Clifford 2-design projects
    onto span{|I+ I+>, |I- I->} with -1/d^2 cross terms; in tilde
    coordinates |I+> = [d, 0] and |I-> = [1, sqrt(d^2-1)].
    """
    vp = np.kron([D, 0.0], [D, 0.0])
    vm = np.kron([1.0, math.sqrt(D * D - 1)], [1.0, math.sqrt(D * D - 1)])
    g = np.outer(vp, vp) + np.outer(vm, vm)
    g -= (np.outer(vp, vm) + np.outer(vm, vp)) / D ** 2
    return g / (D ** 4 - 1)


def single_site_superop_tilde() -> np.ndarray:
    """Averaged single-qubit gate superoperator (used for N = 1 chains)."""
    up = np.array([D, 0.0])
    um = np.array([1.0, math.sqrt(D * D - 1)])
    g = np.outer(up, up) + np.outer(um, um)
    g -= (np.outer(up, um) + np.outer(um, up)) / D
    return g / (D * D - 1)


def _site_init() -> np.ndarray:
    """Tilde coordinates of the per-site initial superstate |0000>."""
    return np.array([1.0 / D, math.sqrt((D - 1) / (D + 1)) / D])


# ---------------------------------------------------------------------------
# ReplicaState and the dense chain engine
# ---------------------------------------------------------------------------

@dataclass
class ReplicaState:
    basis: str                      # "chain_tilde" | "symmetric_W"
    amplitudes: np.ndarray
    log_scale: float = 0.0
    touched: np.ndarray | None = field(default=None, repr=False)

    def renormalize(self):
        m = float(np.max(np.abs(self.amplitudes)))
        if m == 0.0:
            raise FloatingPointError("replica state vanished")
        if not 0.5 <= m <= 2.0:
            self.amplitudes = self.amplitudes / m
            self.log_scale += math.log(m)
        return self


def _chain_bonds(n: int, layer: int):
    j = layer & 1
    out = []
    while j + 1 < n:
        out.append((j, j + 1))
        j += 2
    return out


def _apply_bond(v: np.ndarray, g: np.ndarray, n: int, j: int) -> np.ndarray:
    """Apply a 4x4 map on adjacent tilde sites (j, j+1) of a 2^n vector."""
    pre = 1 << j
    post = 1 << (n - j - 2)
    v = v.reshape(pre, 4, post)
    return np.einsum("ab,ibj->iaj", g, v).reshape(-1)


def _evolve_chain_steps(n: int, depth: int):
    """Yield (t, ReplicaState) for t = 0..depth (state shared, do not keep)."""
    if n > CHAIN_DENSE_MAX:
        raise ValueError(f"dense chain engine capped at N = {CHAIN_DENSE_MAX}")
    w = _site_init()
    if n == 1:
        v = w.copy()
        g1 = single_site_superop_tilde()
        state = ReplicaState("chain_tilde", v, 0.0,
                             np.zeros(1, dtype=bool))
        yield 0, state
        for t in range(1, depth + 1):
            state.amplitudes = g1 @ state.amplitudes
            state.touched[:] = True
            state.renormalize()
            yield t, state
        return
    v = np.array([1.0])
    for _ in range(n):
        v = np.kron(v, w)
    g = gate_superop_tilde()
    state = ReplicaState("chain_tilde", v, 0.0, np.zeros(n, dtype=bool))
    yield 0, state
    for t in range(1, depth + 1):
        for (a, b) in _chain_bonds(n, t - 1):
            state.amplitudes = _apply_bond(state.amplitudes, g, n, a)
            state.touched[a] = state.touched[b] = True
        state.renormalize()
        yield t, state


def evolve_chain(n: int, depth: int, architecture: str = "chain1d") -> ReplicaState:
    if architecture != "chain1d":
        raise ValueError("dense replica evolution supports chain1d only")
    for t, state in _evolve_chain_steps(n, depth):
        pass
    return ReplicaState(state.basis, state.amplitudes.copy(),
                        state.log_scale, state.touched.copy())


def _chain_contract_log(state: ReplicaState, n: int) -> float:
    """log <0^{(x)4N}| state >, with exact handling of untouched sites.

    The boundary projects onto the per-site tilde expansion; a never-gated
    site still holds the exact |0000> whose self-overlap is 1, not the
    projected 1/3, hence a factor 3 per untouched site.
    """
    w = _site_init()
    if n == 1:
        val = float(w @ state.amplitudes)
    else:
        v = state.amplitudes.reshape((2,) * n)
        for _ in range(n):
            v = np.tensordot(w, v, axes=([0], [0]))
        val = float(v)
    untouched = int(n - np.count_nonzero(state.touched))
    if val <= 0.0:
        raise FloatingPointError("non-positive collision contraction")
    return math.log(val) + state.log_scale + untouched * _LN3


# ---------------------------------------------------------------------------
# permutation-symmetric W-basis engine (alltoall)
# ---------------------------------------------------------------------------

def _lbinom(n, k):
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


@lru_cache(maxsize=None)
def permutation_layer(n: int) -> np.ndarray:
    """Averaged alltoall layer on the symmetric W basis, (N+1)x(N+1).

    L_{m,n'} = 3^{(n'+m)/2} sqrt(m!(N-m)!/(n'!(N-n')!)) d_m^{(n')}/binom(N,n')
    with d_m^{(n')} = sum_r multinom(N/2; r, n'-2r, N/2-n'+r) 2^{n'-2r}
    c_m^{(r)} and c_m^{(r)} = 2^{2(n'-r)-m} 15^{-(n'-r)} binom(n'-r, m-n'+r).
    All terms are positive, so everything is assembled in log space.
    """
    if n % 2 or n < 2:
        raise ValueError("permutation_layer requires even N >= 2")
    if n > SYMMETRIC_MAX:
        raise ValueError(f"symmetric engine capped at N = {SYMMETRIC_MAX}")
    half = n // 2
    L = np.zeros((n + 1, n + 1))
    gl = np.array([math.lgamma(k + 1) for k in range(n + 2)])  # gl[k]=log k!
    m = np.arange(n + 1)
    row_pref = 0.5 * (m * _LN3 + gl[m] + gl[n - m])
    for nn in range(n + 1):
        base = 0.5 * nn * _LN3 - (gl[n] - gl[nn] - gl[n - nn]) \
            - 0.5 * (gl[nn] + gl[n - nn])
        r = np.arange(max(0, nn - half), nn // 2 + 1)
        if r.size == 0:
            continue
        k = m[:, None] - nn + r[None, :]           # binom(nn-r, k) index
        top = nn - r[None, :]
        valid = (k >= 0) & (k <= top)
        kc = np.where(valid, k, 0)
        lmult = gl[half] - gl[r] - gl[nn - 2 * r] - gl[half - nn + r]
        lt = (lmult + (nn - 2 * r) * _LN2 - (nn - r) * _LN15)[None, :]
        lt = lt + (2.0 * (nn - r[None, :]) - m[:, None]) * _LN2
        lt = lt + gl[top] - gl[kc] - gl[top - kc]
        lt = np.where(valid, lt, -np.inf)
        mx = lt.max(axis=1)
        ok = mx > -np.inf
        s = np.exp(lt[ok] - mx[ok, None]).sum(axis=1)
        L[ok, nn] = np.exp(base + row_pref[ok] + mx[ok] + np.log(s))
    return L


def _w_boundary_log(n: int):
    """Normalized W-basis boundary vector and its log norm.

    w_k = 2^{-N} 3^{-k/2} sqrt(binom(N,k)); |w|^2 = 3^{-N}.
    """
    logw = np.array([-n * _LN2 - 0.5 * k * _LN3 + 0.5 * _lbinom(n, k)
                     for k in range(n + 1)])
    lognorm = -0.5 * n * _LN3
    v = np.exp(logw - lognorm)
    return v, lognorm


def collision_log_curve(n: int, architecture: str, depth: int) -> np.ndarray:
    """log Z_t for t = 0..depth."""
    out = np.empty(depth + 1)
    if architecture == "chain1d":
        for t, state in _evolve_chain_steps(n, depth):
            out[t] = _chain_contract_log(state, n)
        return out
    if architecture != "alltoall":
        raise ValueError(
            f"no exact collision engine for architecture {architecture!r}")
    if n % 2 or n < 2:
        raise ValueError("alltoall requires even N >= 2")
    L = permutation_layer(n)
    w, lognorm = _w_boundary_log(n)
    out[0] = 0.0  # untouched everywhere: Z_0 = 1 exactly
    v = w.copy()
    ls = 0.0
    for t in range(1, depth + 1):
        v = L @ v
        m = float(np.max(np.abs(v)))
        v /= m
        ls += math.log(m)
        out[t] = 2.0 * lognorm + ls + math.log(float(w @ v))
    return out


def collision_Z(n: int, architecture: str, depth: int) -> float:
    return math.exp(collision_log_curve(n, architecture, depth)[depth])


def _log_2n_plus_1(n: int) -> float:
    return n * _LN2 + math.log1p(2.0 ** (-n))


def avg_fidelity_exact(n: int, architecture: str, depth: int) -> float:
    """E[F~] = (2^N+1) 2^N Z_t - 1, for product target states."""
    logz = collision_log_curve(n, architecture, depth)[depth]
    return math.expm1(_log_2n_plus_1(n) + n * _LN2 + logz)


def avg_fidelity_curve(n: int, architecture: str, depth: int) -> np.ndarray:
    logz = collision_log_curve(n, architecture, depth)
    return np.expm1(_log_2n_plus_1(n) + n * _LN2 + logz)


# ---------------------------------------------------------------------------
# purity observables
# ---------------------------------------------------------------------------

def _site_observable_from_embedding(ket4, bra4):
    """Tilde-basis 2x2 of (|ket><bra| on replicas 1,2) (x) I on replicas 3,4.

    ket4/bra4 are 4-dim vectors on the (k1, b1) factor.
    """
    t0, t1 = site_tilde_vectors()
    o = np.kron(np.outer(np.asarray(ket4, float), np.asarray(bra4, float)),
                np.eye(4))
    B = np.empty((2, 2))
    for mu, tm in enumerate((t0, t1)):
        for nu, tn in enumerate((t0, t1)):
            B[mu, nu] = tm @ o @ tn
    # A never-gated site keeps its explicit measurement-outcome sum
    # (1/2)(|0000> + |1111>) instead of the absorbed 2 x |0000>, so its
    # factor relative to the 2^{2N} prefactor is the following average.
    corner = float(o[0, 0] + o[0, 15] + o[15, 0] + o[15, 15]) / 4.0
    return B, corner


def site_observable_product(rho_site: np.ndarray):
    """Site observable for O = |rho><rho| (x) I, product rho.

    Re-derived from the 16-dim embedding; for valid density matrices it
    comes out diagonal: diag(1/d, (tr rho^2 - 1/d)/(d^2-1)).
    """
    rho_site = np.asarray(rho_site, dtype=float)
    vec = rho_site.reshape(4)
    B, corner = _site_observable_from_embedding(vec, vec)
    return B, corner


def site_observables_ghz():
    """The 16 site-uniform product terms of O for the GHZ state.

    vec(rho_GHZ) = 1/2 sum_{a,b} |a>^N (x) |b>^N picks up weight 1/4 per
    (outer) pair of terms; each term factorizes over sites.
    """
    terms = []
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    ket = np.zeros(4)
                    bra = np.zeros(4)
                    ket[2 * a + b] = 1.0
                    bra[2 * c + d] = 1.0
                    B, corner = _site_observable_from_embedding(ket, bra)
                    terms.append((0.25, B, corner))
    return terms


def _parse_rho_spec(rho_spec):
    if isinstance(rho_spec, (tuple, list)):
        kind, *args = rho_spec
        return str(kind), [float(a) for a in args]
    s = str(rho_spec)
    if "(" in s:
        base, argstr = s.split("(", 1)
        return base.strip(), [float(a) for a in argstr.rstrip(")").split(",")]
    return s, []


def _purity_terms(rho_spec):
    """(true_purity_fn, list of (weight, B, corner)) for a rho spec."""
    kind, args = _parse_rho_spec(rho_spec)
    if kind == "product":
        mu = args[0]
        rho = np.diag([math.cos(mu) ** 2, math.sin(mu) ** 2])
        B, corner = site_observable_product(rho)
        # the embedding must confirm the stated diagonal form
        assert abs(B[0, 1]) < 1e-14 and abs(B[1, 0]) < 1e-14
        def true_purity(n):
            return (math.cos(mu) ** 4 + math.sin(mu) ** 4) ** n
        return true_purity, [(1.0, B, corner)]
    if kind == "ghz":
        def true_purity(n):
            return 1.0
        return true_purity, site_observables_ghz()
    raise ValueError(f"unsupported rho spec {rho_spec!r}")


def _apply_site_all(v: np.ndarray, B: np.ndarray, n: int) -> np.ndarray:
    """Apply the same 2x2 site matrix on every tilde site of a 2^n vector."""
    for j in range(n):
        pre = 1 << j
        post = 1 << (n - j - 1)
        v = np.einsum("ab,ibj->iaj", B, v.reshape(pre, 2, post)).reshape(-1)
    return v


def avg_purity_curve(n: int, architecture: str, depths, rho_spec):
    """E[P~] at each requested depth (sorted ascending)."""
    depths = sorted(int(t) for t in depths)
    tmax = depths[-1]
    _, terms = _purity_terms(rho_spec)
    want = set(depths)
    out = {}
    if architecture == "chain1d":
        if n > CHAIN_DENSE_MAX:
            raise ValueError(f"dense chain engine capped at N = {CHAIN_DENSE_MAX}")
        logpref = 2.0 * n * _LN2 + 2.0 * math.log1p(2.0 ** n)
        for t, state in _evolve_chain_steps(n, tmax):
            if t not in want:
                continue
            total = 0.0
            untouched = ~state.touched
            for (wgt, B, corner) in terms:
                if n == 1:
                    if untouched[0]:
                        val = corner
                    else:
                        val = float(state.amplitudes @ (B @ state.amplitudes))
                else:
                    v = state.amplitudes
                    val = 1.0
                    # untouched sites factor out exactly as |0000>
                    if untouched.any():
                        w = _site_init()
                        v = v.reshape((2,) * n)
                        for j in range(n - 1, -1, -1):
                            if untouched[j]:
                                v = np.take(v, 0, axis=j) / w[0]
                                val *= corner
                        v = np.asarray(v).reshape(-1)
                    ng = int(np.count_nonzero(state.touched))
                    if ng:
                        val *= float(v @ _apply_site_all(v.copy(), B, ng))
                    else:
                        val *= float(np.asarray(v))
                total += wgt * val
            if total <= 0:
                raise FloatingPointError("non-positive purity contraction")
            big = math.exp(logpref + 2.0 * state.log_scale + math.log(total))
            out[t] = big - 2.0 ** n - 2.0
        return np.array([out[t] for t in depths])
    if architecture != "alltoall":
        raise ValueError(
            f"no exact purity engine for architecture {architecture!r}")
    return _purity_curve_symmetric(n, depths, rho_spec)


def avg_purity_exact(n: int, architecture: str, depth: int, rho_spec) -> float:
    return float(avg_purity_curve(n, architecture, [depth], rho_spec)[0])


# -- mpmath W-basis purity ---------------------------------------------------

def _perm_layer_mp(n: int):
    """permutation_layer(N) as an exact-to-precision mpmath matrix."""
    half = n // 2
    fact = [mp.mpf(math.factorial(k)) for k in range(n + 1)]
    L = [[mp.mpf(0)] * (n + 1) for _ in range(n + 1)]
    for nn in range(n + 1):
        cnn = math.comb(n, nn)
        for m in range(n + 1):
            num = 0
            for r in range(max(0, nn - half, nn - m), nn // 2 + 1):
                k = m - nn + r
                if k < 0 or k > nn - r:
                    continue
                mult = (math.factorial(half)
                        // (math.factorial(r) * math.factorial(nn - 2 * r)
                            * math.factorial(half - nn + r)))
                num += (mult * (1 << (nn - 2 * r)) * (1 << (2 * (nn - r) - m))
                        * math.comb(nn - r, k) * 15 ** r)
            if num == 0:
                continue
            val = mp.sqrt(mp.mpf(3) ** (nn + m)
                          * fact[m] * fact[n - m] / (fact[nn] * fact[n - nn]))
            L[m][nn] = val * mp.mpf(num) / (mp.mpf(15) ** nn * cnn)
    return L


def _symmetric_lift_mp(Bmp, n: int):
    """<W_m| B^{(x)N} |W_n'> as mpmath rows (B given as 2x2 of mpf)."""
    b00, b01, b10, b11 = Bmp[0][0], Bmp[0][1], Bmp[1][0], Bmp[1][1]
    out = [[mp.mpf(0)] * (n + 1) for _ in range(n + 1)]
    for nn in range(n + 1):
        for m in range(n + 1):
            s = mp.mpf(0)
            for k in range(max(0, m + nn - n), min(m, nn) + 1):
                c = mp.mpf(math.comb(nn, k) * math.comb(n - nn, m - k))
                s += (c * b11 ** k * b01 ** (nn - k) * b10 ** (m - k)
                      * b00 ** (n - nn - m + k))
            if s != 0:
                s *= mp.sqrt(mp.mpf(math.comb(n, nn))
                             / mp.mpf(math.comb(n, m)))
            out[m][nn] = s
    return out


def symmetric_lift(B: np.ndarray, n: int) -> np.ndarray:
    """Restriction of B^{(x)N} to the symmetric subspace, W basis, float."""
    B = np.asarray(B, dtype=float)
    out = np.zeros((n + 1, n + 1))
    for nn in range(n + 1):
        for m in range(n + 1):
            s = 0.0
            for k in range(max(0, m + nn - n), min(m, nn) + 1):
                s += (math.comb(nn, k) * math.comb(n - nn, m - k)
                      * B[1, 1] ** k * B[0, 1] ** (nn - k)
                      * B[1, 0] ** (m - k) * B[0, 0] ** (n - nn - m + k))
            if s:
                s *= math.exp(0.5 * (_lbinom(n, nn) - _lbinom(n, m)))
            out[m, nn] = s
    return out


def _site_tilde_vectors_mp():
    t0 = [mp.mpf(0)] * 16
    t1 = [mp.mpf(0)] * 16
    half = mp.mpf(1) / D
    s3 = mp.sqrt(mp.mpf(D * D - 1))
    for i in range(D):
        for j in range(D):
            t0[i * 8 + i * 4 + j * 2 + j] += half
            t1[i * 8 + j * 4 + j * 2 + i] += 1 / s3
            t1[i * 8 + i * 4 + j * 2 + j] -= half / s3
    return t0, t1


def _site_observable_mp(ket4, bra4):
    t0, t1 = _site_tilde_vectors_mp()
    def entry(ta, tb):
        s = mp.mpf(0)
        for p in range(4):
            for q in range(4):
                kp, bp = ket4[p], bra4[q]
                if kp == 0 or bp == 0:
                    continue
                for rest in range(4):
                    s += ta[4 * p + rest] * kp * bp * tb[4 * q + rest]
        return s
    return [[entry(t0, t0), entry(t0, t1)], [entry(t1, t0), entry(t1, t1)]]


def _purity_terms_mp(rho_spec):
    """Site observables as (weight, 2x2 mpf) at the current precision."""
    kind, args = _parse_rho_spec(rho_spec)
    if kind == "product":
        mu = mp.mpf(args[0])
        vec = [mp.cos(mu) ** 2, mp.mpf(0), mp.mpf(0), mp.sin(mu) ** 2]
        return [(mp.mpf(1), _site_observable_mp(vec, vec))]
    if kind == "ghz":
        terms = []
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    for d in range(2):
                        ket = [mp.mpf(0)] * 4
                        bra = [mp.mpf(0)] * 4
                        ket[2 * a + b] = mp.mpf(1)
                        bra[2 * c + d] = mp.mpf(1)
                        terms.append(
                            (mp.mpf(1) / 4, _site_observable_mp(ket, bra)))
        return terms
    raise ValueError(f"unsupported rho spec {rho_spec!r}")


def _purity_curve_symmetric(n: int, depths, rho_spec):
    if n % 2 or n < 2:
        raise ValueError("alltoall requires even N >= 2")
    if n > SYMMETRIC_MAX:
        raise ValueError(f"symmetric engine capped at N = {SYMMETRIC_MAX}")
    if 0 in depths:
        raise ValueError("symmetric purity engine requires depth >= 1")
    dps = 25 + int(0.302 * n) + 15
    out = []
    with mp.workdps(dps):
        L = _perm_layer_mp(n)
        w = [mp.mpf(2) ** (-n) * mp.mpf(3) ** mp.mpf(-0.5 * k)
             * mp.sqrt(mp.mpf(math.comb(n, k))) for k in range(n + 1)]
        lifts = []
        for (wgt, Bmp) in _purity_terms_mp(rho_spec):
            lifts.append((wgt, _symmetric_lift_mp(Bmp, n)))
        pref = mp.mpf(2) ** (2 * n) * (mp.mpf(2) ** n + 1) ** 2
        v = w
        t = 0
        for target_t in depths:
            while t < target_t:
                v = [sum(L[m][k] * v[k] for k in range(n + 1))
                     for m in range(n + 1)]
                t += 1
            total = mp.mpf(0)
            for (wgt, lift) in lifts:
                ov = [sum(lift[m][k] * v[k] for k in range(n + 1))
                      for m in range(n + 1)]
                total += wgt * sum(v[m] * ov[m] for m in range(n + 1))
            out.append(float(pref * total - mp.mpf(2) ** n - 2))
    return np.array(out)


# ---------------------------------------------------------------------------
# depth extraction
# ---------------------------------------------------------------------------

def t_star(ts, values, target_value: float, delta: float,
           relative: bool):
    """Minimum listed depth from which the deviation stays within delta.

    Deviation is |v - target| (absolute) or |v - target| / |target|
    (relative) and must hold for every listed depth >= t*.  Returns None
    when the condition never holds through the last depth.
    """
    ts = list(ts)
    values = list(values)
    if not ts:
        raise ValueError("empty curve")
    if relative and target_value == 0:
        raise ValueError("relative deviation needs a nonzero target")
    best = None
    for t, v in zip(reversed(ts), reversed(values)):
        dev = abs(v - target_value)
        if relative:
            dev /= abs(target_value)
        if dev <= delta:
            best = t
        else:
            break
    return best
