"""Shallow-shadow estimation with approximate channel inversion.

Modules cover the full pipeline: stabilizer-circuit snapshot sampling
(`tableau`, `architectures`, `shadows`), exact replica-average engines
(`replica`), closed-form analytics (`analytics`), brute-force oracles for
tiny systems (`oracle`), and a CLI harness (`cli`).
"""

from .analytics import (
    A_CHAIN,
    BoundParams,
    fidelity_var_inf,
    g_bound,
    ls_shadow_norm,
    pauli_var_inf,
    purity_var_asymptote,
    purity_var_bound_global,
    purity_var_bound_pauli,
    purity_var_inf,
    t_anticoncentration,
)
from .architectures import ARCH_CODES, CircuitPlan, build_circuit, inverse_circuit
from .cliffords import CliffordGateId, gate_tables
from .pauli import PauliString
from .replica import (
    ReplicaState,
    avg_fidelity_curve,
    avg_fidelity_exact,
    avg_purity_curve,
    avg_purity_exact,
    collision_Z,
    collision_log_curve,
    evolve_chain,
    gate_superop_tilde,
    permutation_layer,
    symmetric_lift,
    t_star,
)
from .shadows import (
    DEFAULT_B,
    DEFAULT_M,
    DEFAULT_R,
    EstimateSeries,
    Snapshot,
    batch_statistics,
    collect_fidelity_series,
    collect_pauli_series,
    collect_purity_series,
    collect_snapshot,
    collect_snapshots,
    fidelity_estimate,
    load_snapshots,
    pauli_estimate,
    purity_estimate,
    save_snapshots,
)
from .tableau import StabilizerTableau, prepare

__all__ = [
    "A_CHAIN",
    "ARCH_CODES",
    "BoundParams",
    "CircuitPlan",
    "CliffordGateId",
    "DEFAULT_B",
    "DEFAULT_M",
    "DEFAULT_R",
    "EstimateSeries",
    "PauliString",
    "ReplicaState",
    "Snapshot",
    "StabilizerTableau",
    "avg_fidelity_curve",
    "avg_fidelity_exact",
    "avg_purity_curve",
    "avg_purity_exact",
    "batch_statistics",
    "build_circuit",
    "collect_fidelity_series",
    "collect_pauli_series",
    "collect_purity_series",
    "collect_snapshot",
    "collect_snapshots",
    "collision_Z",
    "collision_log_curve",
    "evolve_chain",
    "fidelity_estimate",
    "fidelity_var_inf",
    "g_bound",
    "gate_superop_tilde",
    "gate_tables",
    "inverse_circuit",
    "load_snapshots",
    "ls_shadow_norm",
    "pauli_estimate",
    "pauli_var_inf",
    "permutation_layer",
    "prepare",
    "purity_estimate",
    "purity_var_asymptote",
    "purity_var_bound_global",
    "purity_var_bound_pauli",
    "purity_var_inf",
    "save_snapshots",
    "symmetric_lift",
    "t_anticoncentration",
    "t_star",
]

__version__ = "0.1.0"
