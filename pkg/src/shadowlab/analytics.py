"""Closed-form depth bounds and infinite-sample estimator variances.

Pure double-precision functions used for comparison curves against the
Monte Carlo and replica-exact pipelines.  The brickwork-chain
anticoncentration constants are a = log(5/4) and
T_N = [log N + log(e-1)]/a + 1; no constants are provided for other
architectures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

A_CHAIN = math.log(5.0 / 4.0)


def t_anticoncentration(n: int) -> float:
    """Depth T_N past which the collision sandwich decays for chain1d."""
    if n < 2:
        raise ValueError("need N >= 2")
    return (math.log(n) + math.log(math.e - 1.0)) / A_CHAIN + 1.0


@dataclass(frozen=True)
class BoundParams:
    """Per-architecture anticoncentration constants (a, T_N)."""
    a: float
    t_n: float
    n: int
    delta: float

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("decay rate a must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")

    @classmethod
    def chain1d(cls, n: int, delta: float) -> "BoundParams":
        return cls(A_CHAIN, t_anticoncentration(n), n, delta)


def g_bound(n: int, delta: float) -> float:
    """Depth guaranteeing fidelity-estimator bias <= delta on chain1d.

    g(N, delta) = [log(N/delta) + log(2(e-1))]/log(5/4) + 1.
    """
    if n < 2:
        raise ValueError("need N >= 2")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return (math.log(n / delta) + math.log(2.0 * (math.e - 1.0))) / A_CHAIN + 1.0


def ls_shadow_norm(z_t: float, n: int) -> float:
    """Locally-scrambled squared shadow norm (2^N+1)^2 (Z_t - 2^{-2N})."""
    d = 2.0 ** n
    lo = 2.0 / (d * (d + 1.0))
    if not lo - 1e-12 <= z_t <= 1.0 + 1e-12:
        raise ValueError(f"Z_t = {z_t} outside [{lo}, 1]")
    return (d + 1.0) ** 2 * (z_t - 1.0 / d ** 2)


def fidelity_var_inf(n: int, m_snapshots: int) -> float:
    """Variance of the fidelity estimator under global Cliffords.

    (1/M) * 2(2^N - 1)/(2^N + 2), for pure target = lab state.
    """
    if m_snapshots < 1:
        raise ValueError("need M >= 1")
    d = 2.0 ** n
    return 2.0 * (d - 1.0) / ((d + 2.0) * m_snapshots)


def purity_var_inf(n: int, m_snapshots: int, p2: float, p3: float) -> float:
    """Exact variance of the pairwise purity estimator at t = infinity.

    P2 = tr rho^2 and P3 = tr rho^3 of the lab state; the pairwise and
    shared-snapshot cross contributions combine into

    binom(M,2)^{-1} { 2(d+1)^2 (d+3+2P2)/(d+2) - (d+2+P2)^2
                      + 2(M-2) [ (d+1)(1+3P2+2P3)/(d+2) - (1+P2)^2 ] }.
    """
    if m_snapshots < 2:
        raise ValueError("need M >= 2")
    if not (0.0 < p2 <= 1.0 and 0.0 < p3 <= 1.0):
        raise ValueError("P2, P3 must lie in (0, 1]")
    d = 2.0 ** n
    m = float(m_snapshots)
    pair = 2.0 * (d + 1.0) ** 2 * (d + 3.0 + 2.0 * p2) / (d + 2.0) \
        - (d + 2.0 + p2) ** 2
    cross = (d + 1.0) * (1.0 + 3.0 * p2 + 2.0 * p3) / (d + 2.0) \
        - (1.0 + p2) ** 2
    return (pair + 2.0 * (m - 2.0) * cross) / (m * (m - 1.0) / 2.0)


def purity_var_asymptote(n: int, m_snapshots: int) -> float:
    """Leading large-N behaviour 2 * 2^{2N} / (M(M-1))."""
    m = float(m_snapshots)
    return 2.0 * 2.0 ** (2 * n) / (m * (m - 1.0))


def purity_var_bound_pauli(n: int, m_snapshots: int, p2: float) -> float:
    """Upper bound for the t = 0 (random Pauli basis) purity estimator."""
    m = float(m_snapshots)
    return 4.0 * (2.0 ** n * p2 / m) + 2.0 * (2.0 ** (2 * n) / (m - 1.0)) ** 2


def purity_var_bound_global(n: int, m_snapshots: int, p2: float) -> float:
    """Upper bound for the t = infinity purity estimator."""
    m = float(m_snapshots)
    return 12.0 * p2 / m + 2.0 * (9.0 * 2.0 ** (2 * n)) / (m - 1.0) ** 2


def pauli_var_inf(n: int, m_snapshots: int, expval: float) -> float:
    """Variance of the Pauli estimator at t = infinity.

    (2^N + 1 - <P>^2) / M, for pure lab states.
    """
    if abs(expval) > 1.0 + 1e-12:
        raise ValueError("|<P>| must be <= 1")
    return (2.0 ** n + 1.0 - expval ** 2) / m_snapshots
