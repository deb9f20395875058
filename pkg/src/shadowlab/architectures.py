"""Deterministic circuit-layer construction for the three connectivities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K

ARCH_CODES = {"chain1d": 0, "grid2d": 1, "alltoall": 2}


@dataclass(frozen=True)
class CircuitPlan:
    """Layer structure plus per-pair gate draws, derived from (inputs, seed).

    pairs: int32 (depth, maxpairs, 2); npairs: int32 (depth,); gate_ids:
    int32 (depth, maxpairs).  `inverted` marks plans whose arrays already
    encode the inverse circuit (layers reversed, gates inverted); they are
    applied forward like any other plan.
    """

    architecture: str
    n: int
    depth: int
    seed: int
    pairs: np.ndarray = field(repr=False)
    npairs: np.ndarray = field(repr=False)
    gate_ids: np.ndarray = field(repr=False)
    inverted: bool = False

    @property
    def arch_code(self) -> int:
        return ARCH_CODES[self.architecture]

    def layers(self):
        """Per-layer (pair list, gate id list) view."""
        out = []
        for li in range(self.depth):
            k = int(self.npairs[li])
            out.append((
                [tuple(map(int, self.pairs[li, j])) for j in range(k)],
                [int(self.gate_ids[li, j]) for j in range(k)],
            ))
        return out


def _validate(architecture: str, n: int, depth: int):
    if architecture not in ARCH_CODES:
        raise ValueError(f"unknown architecture {architecture!r}")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if architecture == "chain1d":
        if n < 2:
            raise ValueError("chain1d requires N >= 2")
    elif architecture == "grid2d":
        side = math.isqrt(n)
        if side * side != n or side < 2:
            raise ValueError("grid2d requires N = L^2 with L >= 2")
    else:
        if n < 2 or n % 2:
            raise ValueError("alltoall requires even N >= 2")


def build_circuit(architecture: str, n: int, depth: int, seed: int) -> CircuitPlan:
    """Deterministic CircuitPlan; identical inputs give bit-identical plans."""
    _validate(architecture, n, depth)
    maxp = max(n // 2, 1)
    pairs = np.zeros((max(depth, 1), maxp, 2), dtype=np.int32)
    npairs = np.zeros(max(depth, 1), dtype=np.int32)
    gids = np.zeros((max(depth, 1), maxp), dtype=np.int32)
    if depth > 0:
        K._gen_plan(ARCH_CODES[architecture], n, depth,
                    np.uint64(seed & (2 ** 64 - 1)), pairs, npairs, gids)
    return CircuitPlan(architecture, n, depth, seed, pairs, npairs, gids)


def inverse_circuit(plan: CircuitPlan) -> CircuitPlan:
    """Plan implementing the inverse unitary: reversed layers, inverted gates."""
    pairs = plan.pairs[::-1].copy()
    npairs = plan.npairs[::-1].copy()
    gids = K.INV720[plan.gate_ids[::-1]].astype(np.int32)
    return CircuitPlan(plan.architecture, plan.n, plan.depth, plan.seed,
                       pairs, npairs, gids, inverted=not plan.inverted)
