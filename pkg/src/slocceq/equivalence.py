"""Equivalence decisions for four-partite and tripartite pure states.

Pipeline for the four-partite check: invariant screen, simultaneous
singular-frame decomposition of both states at a common bipartition,
block-triangular coupling search, Kronecker factorization of the coupling
into per-party operators, and a final state-level verification. A verdict
is three-valued: EQUIVALENT carries an operator certificate that has been
re-verified on the input states, INEQUIVALENT carries an invariant proof,
and UNDECIDED carries diagnostics only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .decomposition import SingularFrame, triple_state_set
from .invariants import (
    InequivalenceProof,
    classify_tripartite_qubit,
    invariant_screen,
    tripartite_as_pure_state,
)
from .solver import (
    PTildeCandidate,
    SolveOutcome,
    SolveStatus,
    SolverConfig,
    solve_ptilde,
    solve_ptilde_single,
)
from .states import (
    Bipartition,
    LocalOperatorTuple,
    PureState,
    STANDARD_CUTS,
    TripartiteState,
    contract_local_ops,
)
from .tensorops import (
    DEFAULT_RTOL,
    FactorizationError,
    _lead_phase,
    commutation_matrix,
    fold,
    numerical_rank,
    rank1_kron_factor,
    realign,
    vectorize,
)

__all__ = [
    "EquivalenceStatus",
    "Certificate",
    "EquivalenceVerdict",
    "RecoveryError",
    "recover_local_operators",
    "verify_equivalence",
    "check_fourpartite_equiv",
    "check_fourpartite_equiv_all_cuts",
    "check_tripartite_equiv",
    "ProbeStatus",
    "ProbeResult",
    "rank_preservation_probe",
]

DEFAULT_VERIFY_TOL = 1e-8


class EquivalenceStatus(Enum):
    """Outcome of an equivalence check."""

    EQUIVALENT = "equivalent"
    INEQUIVALENT = "inequivalent"
    UNDECIDED = "undecided"


class RecoveryError(ValueError):
    """Raised when a coupling candidate does not factor into local operators.

    Attributes
    ----------
    second_singular_value : float
        Second singular value of the realigned coupling map, relative to
        the largest one; zero when the failure was not a rank test.
    swapped_pair : bool
        True when factorization succeeds after composing with the
        fold-transpose permutation, meaning the states can only be related
        by operators that also exchange the two parties of the pair.
    """

    def __init__(
        self,
        message: str,
        second_singular_value: float = 0.0,
        swapped_pair: bool = False,
    ):
        super().__init__(message)
        self.second_singular_value = float(second_singular_value)
        self.swapped_pair = bool(swapped_pair)


@dataclass(frozen=True, eq=False)
class Certificate:
    """Verified local-operator witness of equivalence.

    ``ops`` maps the second (source) state onto the first (target) state:
    ``target ~ scalar * (ops applied to source)`` with relative error
    ``residual``. For four-partite checks ``ops`` is a
    :class:`LocalOperatorTuple` and ``cut`` records the bipartition the
    certificate was derived at; tripartite certificates store a plain
    3-tuple of matrices and no cut.
    """

    ops: Union[LocalOperatorTuple, Tuple[np.ndarray, ...]]
    scalar: complex
    residual: float
    cut: Optional[Bipartition] = None
    swapped_pair: bool = False


@dataclass(frozen=True, eq=False)
class EquivalenceVerdict:
    """Three-valued equivalence decision with supporting evidence."""

    status: EquivalenceStatus
    certificate: Optional[Certificate] = None
    proof: Optional[InequivalenceProof] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.status is EquivalenceStatus.EQUIVALENT:
            if self.certificate is None or self.proof is not None:
                raise ValueError("EQUIVALENT verdict requires a certificate only")
        elif self.status is EquivalenceStatus.INEQUIVALENT:
            if self.proof is None or self.certificate is not None:
                raise ValueError("INEQUIVALENT verdict requires a proof only")
        else:
            if self.certificate is not None or self.proof is not None:
                raise ValueError("UNDECIDED verdict carries no evidence")


def _second_singular_ratio(matrix: np.ndarray) -> float:
    """Ratio sigma_2 / sigma_1 of a matrix, 0.0 for (near-)rank-1 input."""
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size < 2 or s[0] == 0.0:
        return 0.0
    return float(s[1] / s[0])


def _factor_pair(
    matrix: np.ndarray,
    dl: int,
    dr: int,
    rtol: float,
    side: str,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Factor ``matrix`` as a Kronecker pair, probing the swapped layout on failure."""
    gap = _second_singular_ratio(realign(matrix, dl, dr))
    try:
        b, c = rank1_kron_factor(matrix, dl, dr, rtol)
        return b, c, gap
    except FactorizationError as exc:
        swapped = False
        if dl == dr:
            swap = commutation_matrix(dl, dl)
            try:
                rank1_kron_factor(matrix @ swap, dl, dr, rtol)
                swapped = True
            except FactorizationError:
                pass
        raise RecoveryError(
            f"coupling on the {side} pair is not a Kronecker product "
            f"(second singular ratio {gap:.3e})",
            second_singular_value=gap,
            swapped_pair=swapped,
        ) from exc


def recover_local_operators(
    frames: Tuple[SingularFrame, SingularFrame],
    candidate: Union[SolveOutcome, Sequence[PTildeCandidate]],
    rtol: float = DEFAULT_RTOL,
) -> Tuple[LocalOperatorTuple, Dict[str, object]]:
    """Factor an admissible coupling pair into four local operators.

    Parameters
    ----------
    frames : tuple of SingularFrame
        ``(frame, frame_prime)`` for the source and target state,
        decomposed at the same bipartition.
    candidate : SolveOutcome or pair of PTildeCandidate
        Coupling candidate; for a :class:`SolveOutcome` the stored
        candidate pair is used.
    rtol : float
        Relative tolerance for the rank-1 factorization tests.

    Returns
    -------
    ops : LocalOperatorTuple
        Operators in party order mapping the source state onto the target
        state up to a scalar. The first three operators have unit
        Frobenius norm with real positive leading entry; the residual
        scale sits in the last operator.
    diagnostics : dict
        Second-singular ratios of the two realigned coupling maps.

    Raises
    ------
    RecoveryError
        If either coupling map is not a Kronecker product at ``rtol``
        (spurious candidate), or a recovered operator is singular.
    """
    frame, frame_prime = frames
    if isinstance(candidate, SolveOutcome):
        if candidate.candidate is None:
            raise RecoveryError("solver outcome carries no candidate")
        candidate = candidate.candidate
    pt, qt = candidate
    if frame.bipartition != frame_prime.bipartition:
        raise ValueError("frames were taken at different bipartitions")
    if frame.dims != frame_prime.dims:
        raise ValueError("frames have mismatched party dimensions")

    try:
        m_u = np.linalg.inv(
            frame.u_full @ pt.assembled @ frame_prime.u_full.conj().T
        )
        m_v = np.linalg.inv(
            frame.v_full @ qt.assembled @ frame_prime.v_full.conj().T
        )
    except np.linalg.LinAlgError as exc:
        raise RecoveryError(f"coupling candidate is singular: {exc}") from exc

    ia, ib = frame.left_dims
    ic, id_ = frame.right_dims
    a_left1, a_left2, gap_u = _factor_pair(m_u, ia, ib, rtol, "row")
    a_right1, a_right2, gap_v = _factor_pair(np.conj(m_v), ic, id_, rtol, "column")

    cut = frame.bipartition
    by_party = {
        cut.left[0]: a_left1,
        cut.left[1]: a_left2,
        cut.right[0]: a_right1,
        cut.right[1]: a_right2,
    }
    mats = [by_party[k] for k in (1, 2, 3, 4)]

    # Gauge: unit Frobenius norm and real positive leading entry for the
    # first three operators; the residual scalar is absorbed into the last.
    carry = 1.0 + 0.0j
    for k in range(3):
        z = np.linalg.norm(mats[k]) * _lead_phase(mats[k].reshape(-1))
        mats[k] = mats[k] / z
        carry *= z
    mats[3] = mats[3] * carry

    try:
        ops = LocalOperatorTuple(tuple(mats))
    except ValueError as exc:
        raise RecoveryError(f"recovered operator is singular: {exc}") from exc
    diagnostics = {
        "row_pair_factor_gap": gap_u,
        "column_pair_factor_gap": gap_v,
    }
    return ops, diagnostics


def _best_scalar(target: np.ndarray, image: np.ndarray) -> Tuple[complex, float]:
    """Least-squares scalar c and relative residual of target - c * image."""
    denom = np.vdot(image, image).real
    target_norm = float(np.linalg.norm(target))
    if denom <= 0.0 or target_norm == 0.0:
        return 0.0 + 0.0j, 1.0
    c = np.vdot(image, target) / denom
    resid = float(np.linalg.norm(target - c * image)) / target_norm
    return complex(c), resid


def verify_equivalence(
    s1: PureState,
    s2: PureState,
    ops: Union[LocalOperatorTuple, Sequence[np.ndarray]],
    tol: float = DEFAULT_VERIFY_TOL,
) -> Tuple[bool, complex, float]:
    """Check whether ``ops`` maps ``s2`` onto ``s1`` up to a scalar.

    Applies one operator per party to ``s2``, fits the best complex scalar
    ``c`` in the least-squares sense, and accepts when the relative
    residual ``|c * image - s1| / |s1|`` is at most ``tol``. Degenerate
    operators that annihilate ``s2`` fail cleanly with residual 1.

    Returns
    -------
    (passed, scalar, residual)
    """
    if s1.dims != s2.dims:
        return False, 0.0 + 0.0j, 1.0
    mats = ops.ops if isinstance(ops, LocalOperatorTuple) else tuple(
        np.asarray(m, dtype=complex) for m in ops
    )
    image = contract_local_ops(s2.amps, s2.dims, mats)
    c, resid = _best_scalar(s1.amps, image)
    return resid <= tol, c, resid


def _undecided(diagnostics: Dict[str, object]) -> EquivalenceVerdict:
    return EquivalenceVerdict(
        status=EquivalenceStatus.UNDECIDED, diagnostics=diagnostics
    )


def check_fourpartite_equiv(
    s1: PureState,
    s2: PureState,
    cut: Bipartition,
    config: SolverConfig,
    rtol: float = DEFAULT_RTOL,
    verify_tol: float = DEFAULT_VERIFY_TOL,
) -> EquivalenceVerdict:
    """Decide SLOCC equivalence of two four-partite states at one cut.

    The certificate, when found, maps ``s2`` onto ``s1``. The check is
    sound in both decisive directions: INEQUIVALENT verdicts carry an
    invariant proof recomputable from the states alone, EQUIVALENT
    verdicts carry operators re-verified on the input amplitudes at
    ``verify_tol``. Search failure yields UNDECIDED, never INEQUIVALENT.
    """
    if s1.num_parties != 4 or s2.num_parties != 4:
        raise ValueError("four-partite check requires four-party states")
    if s1.dims != s2.dims:
        raise ValueError(f"dimension mismatch: {s1.dims} vs {s2.dims}")

    diagnostics: Dict[str, object] = {
        "cut": cut.label,
        "rtol": rtol,
        "verify_tol": verify_tol,
        "residual_tol": config.residual_tol,
    }

    proof = invariant_screen(s1, s2, cut, rtol)
    if proof is not None:
        diagnostics["stage"] = "invariant_screen"
        return EquivalenceVerdict(
            status=EquivalenceStatus.INEQUIVALENT,
            proof=proof,
            diagnostics=diagnostics,
        )

    triple1, frame1 = triple_state_set(s1, cut, rtol)
    triple2, frame2 = triple_state_set(s2, cut, rtol)
    warnings = list(frame1.warnings) + list(frame2.warnings)
    if warnings:
        diagnostics["frame_warnings"] = warnings
    if frame1.r != frame2.r:
        diagnostics["stage"] = "rank_comparison"
        proof = InequivalenceProof(
            invariant="bipartition-rank",
            location=cut.label,
            value_a=frame1.r,
            value_b=frame2.r,
            description=(
                f"states have ranks {frame1.r} and {frame2.r} across "
                f"the {cut.label} bipartition"
            ),
        )
        return EquivalenceVerdict(
            status=EquivalenceStatus.INEQUIVALENT,
            proof=proof,
            diagnostics=diagnostics,
        )

    # Frames: s2 is the source (operators act on it), s1 is the target.
    outcome = solve_ptilde(frame2, frame1, config)
    diagnostics["solver_status"] = outcome.status.name
    diagnostics["solver_residual"] = outcome.residual
    diagnostics["solver_restarts"] = outcome.restarts_used
    if outcome.status is SolveStatus.EXHAUSTED:
        diagnostics["stage"] = "coupling_search"
        return _undecided(diagnostics)

    factor_rtol = max(rtol, config.residual_tol)
    try:
        ops, recovery_diag = recover_local_operators(
            (frame2, frame1), outcome, factor_rtol
        )
    except RecoveryError as exc:
        diagnostics["stage"] = "operator_recovery"
        diagnostics["recovery_error"] = str(exc)
        diagnostics["swapped_pair"] = exc.swapped_pair
        return _undecided(diagnostics)
    diagnostics.update(recovery_diag)

    passed, scalar, resid = verify_equivalence(s1, s2, ops, verify_tol)
    diagnostics["verify_residual"] = resid
    if not passed:
        diagnostics["stage"] = "verification"
        return _undecided(diagnostics)

    certificate = Certificate(ops=ops, scalar=scalar, residual=resid, cut=cut)
    return EquivalenceVerdict(
        status=EquivalenceStatus.EQUIVALENT,
        certificate=certificate,
        diagnostics=diagnostics,
    )


def check_fourpartite_equiv_all_cuts(
    s1: PureState,
    s2: PureState,
    config: SolverConfig,
    rtol: float = DEFAULT_RTOL,
    verify_tol: float = DEFAULT_VERIFY_TOL,
) -> EquivalenceVerdict:
    """Try all three balanced bipartitions and merge the verdicts.

    An invariant proof at any cut decides INEQUIVALENT before any search
    runs; afterwards the first cut whose certificate verifies decides
    EQUIVALENT. Conflicting decisive verdicts would indicate an internal
    error and raise.
    """
    if s1.num_parties != 4 or s2.num_parties != 4:
        raise ValueError("four-partite check requires four-party states")
    if s1.dims != s2.dims:
        raise ValueError(f"dimension mismatch: {s1.dims} vs {s2.dims}")

    for cut in STANDARD_CUTS:
        proof = invariant_screen(s1, s2, cut, rtol)
        if proof is not None:
            return EquivalenceVerdict(
                status=EquivalenceStatus.INEQUIVALENT,
                proof=proof,
                diagnostics={"cut": cut.label, "stage": "invariant_screen"},
            )

    per_cut: Dict[str, object] = {}
    decided: Optional[EquivalenceVerdict] = None
    for cut in STANDARD_CUTS:
        verdict = check_fourpartite_equiv(s1, s2, cut, config, rtol, verify_tol)
        per_cut[cut.label] = verdict.diagnostics
        if verdict.status is EquivalenceStatus.EQUIVALENT:
            if decided is not None:
                raise AssertionError(
                    "conflicting verdicts: equivalence certificate found after "
                    "an inequivalence proof"
                )
            return verdict
        if verdict.status is EquivalenceStatus.INEQUIVALENT:
            # All sound screens already passed for every cut, so a proof here
            # can only come from a rank disagreement the screen also covers.
            decided = verdict
    if decided is not None:
        return decided
    return _undecided({"stage": "all_cuts", "per_cut": per_cut})


def _complete_frame(columns: np.ndarray) -> np.ndarray:
    """Unitary completion of a tall column stack, gauged deterministically.

    Returns a square unitary whose first ``k`` columns span the input
    columns, with the triangular factor's diagonal phased real positive.
    """
    n, k = columns.shape
    q, r = np.linalg.qr(columns, mode="complete")
    for j in range(k):
        d = r[j, j]
        if abs(d) > 0.0:
            q[:, j] = q[:, j] * (d / abs(d))
    return q


def check_tripartite_equiv(
    t1: TripartiteState,
    t2: TripartiteState,
    config: SolverConfig,
    rtol: float = DEFAULT_RTOL,
    verify_tol: float = DEFAULT_VERIFY_TOL,
) -> EquivalenceVerdict:
    """Decide SLOCC equivalence of two tripartite states in slice form.

    Both states must have linearly independent slices of equal count and
    shape. For two-qubit-slice pairs (shape (2, 2), two slices) the
    tripartite entanglement-class screen runs first and can prove
    inequivalence. Otherwise a single-sided coupling search runs on the
    column frames of the vectorized slices; a successful candidate is
    factored into a slice-space operator pair plus a mixing operator on
    the slice index, and the result is verified slice-wise.

    The certificate operators ``(A_first, A_row, A_col)`` act per party:
    ``t1`` slices match ``scalar * sum_j A_first[i, j] * A_row @ t2_j @
    A_col.T`` within the verification tolerance.
    """
    if t1.slice_shape != t2.slice_shape or t1.r_dim != t2.r_dim:
        raise ValueError(
            f"dimension mismatch: {t1.r_dim} slices of {t1.slice_shape} vs "
            f"{t2.r_dim} slices of {t2.slice_shape}"
        )
    if t1.slice_rank(rtol) < t1.r_dim or t2.slice_rank(rtol) < t2.r_dim:
        raise ValueError("slices must be linearly independent for the check")

    i1, i2 = t1.slice_shape
    r = t1.r_dim
    diagnostics: Dict[str, object] = {
        "rtol": rtol,
        "verify_tol": verify_tol,
        "residual_tol": config.residual_tol,
    }

    if r == 2 and (i1, i2) == (2, 2):
        class1 = classify_tripartite_qubit(tripartite_as_pure_state(t1))
        class2 = classify_tripartite_qubit(tripartite_as_pure_state(t2))
        diagnostics["class_a"] = class1.label.name
        diagnostics["class_b"] = class2.label.name
        if class1.label != class2.label:
            proof = InequivalenceProof(
                invariant="tripartite-class",
                location="three-qubit states",
                value_a=class1.label.name,
                value_b=class2.label.name,
                description=(
                    f"entanglement classes differ: {class1.label.name} vs "
                    f"{class2.label.name}"
                ),
            )
            return EquivalenceVerdict(
                status=EquivalenceStatus.INEQUIVALENT,
                proof=proof,
                diagnostics=diagnostics,
            )

    # Column stacks of vectorized slices; t2 is the source, t1 the target.
    w2 = np.column_stack([vectorize(s) for s in t2.slices])
    w1 = np.column_stack([vectorize(s) for s in t1.slices])
    u_full = _complete_frame(w2)
    u_prime_full = _complete_frame(w1)

    outcome = solve_ptilde_single(u_full, u_prime_full, r, (i2, i1), config)
    diagnostics["solver_status"] = outcome.status.name
    diagnostics["solver_residual"] = outcome.residual
    diagnostics["solver_restarts"] = outcome.restarts_used
    if outcome.status is SolveStatus.EXHAUSTED:
        diagnostics["stage"] = "coupling_search"
        return _undecided(diagnostics)

    pt = outcome.candidate[0]
    try:
        m = np.linalg.inv(u_full @ pt.assembled @ u_prime_full.conj().T)
    except np.linalg.LinAlgError:
        diagnostics["stage"] = "operator_recovery"
        diagnostics["recovery_error"] = "coupling candidate is singular"
        return _undecided(diagnostics)

    factor_rtol = max(rtol, config.residual_tol)
    try:
        a_col, a_row, gap = _factor_pair(m, i2, i1, factor_rtol, "slice")
    except RecoveryError as exc:
        diagnostics["stage"] = "operator_recovery"
        diagnostics["recovery_error"] = str(exc)
        diagnostics["swapped_pair"] = exc.swapped_pair
        return _undecided(diagnostics)
    diagnostics["slice_factor_gap"] = gap

    # Mixing operator on the slice index from the least-squares fit of the
    # mapped source stack onto the target stack.
    mixing_t = np.linalg.lstsq(m @ w2, w1, rcond=None)[0]
    a_first = mixing_t.T
    if numerical_rank(a_first, rtol) < r:
        diagnostics["stage"] = "operator_recovery"
        diagnostics["recovery_error"] = "slice-mixing operator is singular"
        return _undecided(diagnostics)

    # Gauge: unit Frobenius norm, real positive lead for the first two
    # operators; scale absorbed into the column-side operator.
    mats = [a_first, a_row, a_col]
    carry = 1.0 + 0.0j
    for k in range(2):
        z = np.linalg.norm(mats[k]) * _lead_phase(mats[k].reshape(-1))
        mats[k] = mats[k] / z
        carry *= z
    mats[2] = mats[2] * carry
    a_first, a_row, a_col = mats

    image = np.tensordot(a_first, a_row @ t2.stacked() @ a_col.T, axes=([1], [0]))
    scalar, resid = _best_scalar(t1.stacked().reshape(-1), image.reshape(-1))
    diagnostics["verify_residual"] = resid
    if resid > verify_tol:
        diagnostics["stage"] = "verification"
        return _undecided(diagnostics)

    certificate = Certificate(
        ops=(a_first, a_row, a_col), scalar=scalar, residual=resid, cut=None
    )
    return EquivalenceVerdict(
        status=EquivalenceStatus.EQUIVALENT,
        certificate=certificate,
        diagnostics=diagnostics,
    )


class ProbeStatus(Enum):
    """Outcome of the randomized rank-preservation probe."""

    CONSISTENT = "consistent"
    VIOLATED = "violated"


@dataclass(frozen=True, eq=False)
class ProbeResult:
    """Result of :func:`rank_preservation_probe`.

    ``witness`` is a vector whose fold rank changes under the map when the
    probe found a violation; ``checked`` counts the samples examined.
    """

    status: ProbeStatus
    witness: Optional[np.ndarray]
    checked: int
    rank_input: Optional[int] = None
    rank_image: Optional[int] = None


def rank_preservation_probe(
    phi: np.ndarray,
    i1: int,
    i2: int,
    samples: int = 64,
    seed: int = 0,
    rtol: float = DEFAULT_RTOL,
) -> ProbeResult:
    """Randomized necessary-condition test for per-party linear maps.

    A map of the form B (x) C, possibly composed with the fold-transpose,
    preserves the rank of ``fold(a, i1, i2)`` for every vector ``a``. The
    probe draws random vectors stratified by fold rank (rank k built as a
    sum of k outer products) and compares the fold rank before and after
    applying ``phi``. The first discrepancy is returned as a witness;
    exhausting the samples is evidence of consistency, not proof.
    """
    phi = np.asarray(phi, dtype=complex)
    n = i1 * i2
    if phi.shape != (n, n):
        raise ValueError(f"map has shape {phi.shape}, expected {(n, n)}")
    if samples < 1:
        raise ValueError("samples must be at least 1")

    rng = np.random.default_rng(seed)
    kmax = min(i1, i2)

    def draw(shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)

    for index in range(samples):
        k = (index % kmax) + 1
        a = np.zeros(n, dtype=complex)
        for _ in range(k):
            a += np.kron(draw(i2), draw(i1))
        rank_in = numerical_rank(fold(a, i1, i2), rtol)
        rank_out = numerical_rank(fold(phi @ a, i1, i2), rtol)
        if rank_in != rank_out:
            return ProbeResult(
                status=ProbeStatus.VIOLATED,
                witness=a,
                checked=index + 1,
                rank_input=rank_in,
                rank_image=rank_out,
            )
    return ProbeResult(status=ProbeStatus.CONSISTENT, witness=None, checked=samples)
