"""SLOCC equivalence checking for four-partite pure quantum states.

Decides whether two pure states of four parties are related by invertible
local operators. The decision pipeline decomposes both states into a
triple-state set across a chosen bipartition, searches for a block
upper-triangular coupling between the two singular frames, factors the
coupling into one operator per party, and re-verifies the certificate on
the input amplitudes. Inequivalence is established only through sound
invariants; search failure is reported as UNDECIDED.
"""

from .tensorops import (
    DEFAULT_RTOL,
    FactorizationError,
    commutation_matrix,
    fold,
    kron,
    numerical_rank,
    qr,
    rank1_kron_factor,
    realign,
    svd,
    unrealign,
    vectorize,
)
from .states import (
    CATALOG_NAMES,
    Bipartition,
    LocalOperatorTuple,
    PureState,
    STANDARD_CUTS,
    TripartiteState,
    apply_local_ops,
    contract_local_ops,
    make_state,
    read_state_file,
    states_proportional,
    write_state_file,
)
from .decomposition import (
    SingularFrame,
    TripleStateSet,
    complementary_state,
    flatten_bipartition,
    triple_state_set,
)
from .invariants import (
    InequivalenceProof,
    TriClass,
    TriClassLabel,
    classify_tripartite_qubit,
    hyperdeterminant_222,
    invariant_screen,
    tripartite_as_pure_state,
)
from .solver import (
    PTildeCandidate,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    couple_q,
    residual,
    solve_ptilde,
    solve_ptilde_single,
)
from .equivalence import (
    Certificate,
    EquivalenceStatus,
    EquivalenceVerdict,
    ProbeResult,
    ProbeStatus,
    RecoveryError,
    check_fourpartite_equiv,
    check_fourpartite_equiv_all_cuts,
    check_tripartite_equiv,
    rank_preservation_probe,
    recover_local_operators,
    verify_equivalence,
)
from .catalog import (
    GoldenCase,
    cluster_pair_operators,
    golden_cases,
    random_invertible_ops,
    random_orbit_case,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_RTOL",
    "FactorizationError",
    "commutation_matrix",
    "fold",
    "kron",
    "numerical_rank",
    "qr",
    "rank1_kron_factor",
    "realign",
    "svd",
    "unrealign",
    "vectorize",
    "CATALOG_NAMES",
    "Bipartition",
    "LocalOperatorTuple",
    "PureState",
    "STANDARD_CUTS",
    "TripartiteState",
    "apply_local_ops",
    "contract_local_ops",
    "make_state",
    "read_state_file",
    "states_proportional",
    "write_state_file",
    "SingularFrame",
    "TripleStateSet",
    "complementary_state",
    "flatten_bipartition",
    "triple_state_set",
    "InequivalenceProof",
    "TriClass",
    "TriClassLabel",
    "classify_tripartite_qubit",
    "hyperdeterminant_222",
    "invariant_screen",
    "tripartite_as_pure_state",
    "PTildeCandidate",
    "SolveOutcome",
    "SolveStatus",
    "SolverConfig",
    "couple_q",
    "residual",
    "solve_ptilde",
    "solve_ptilde_single",
    "Certificate",
    "EquivalenceStatus",
    "EquivalenceVerdict",
    "ProbeResult",
    "ProbeStatus",
    "RecoveryError",
    "check_fourpartite_equiv",
    "check_fourpartite_equiv_all_cuts",
    "check_tripartite_equiv",
    "rank_preservation_probe",
    "recover_local_operators",
    "verify_equivalence",
    "GoldenCase",
    "cluster_pair_operators",
    "golden_cases",
    "random_invertible_ops",
    "random_orbit_case",
    "__version__",
]
