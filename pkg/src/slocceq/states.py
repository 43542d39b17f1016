"""State containers, the named example catalog, and state file round-trips.

Amplitude layout is fixed package-wide: amplitudes are ordered
lexicographically by party multi-index with the LAST index varying
fastest, so for qubit registers ``amps[k]`` belongs to the bit string of
``k``. Every container is an immutable value; operations return new
objects.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .tensorops import DEFAULT_RTOL, numerical_rank

# Reject only clearly singular operators at construction time; quality
# control for recovered operators happens at verification.
OPERATOR_INVERTIBILITY_RTOL = 1e-12

_INV_SQRT2 = math.sqrt(0.5)
_INV_SQRT3 = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class PureState:
    """Pure state of 2, 3 or 4 finite-dimensional parties.

    Parameters
    ----------
    dims : sequence of int
        Party dimensions, each at least 2.
    amps : sequence of complex
        Amplitudes in last-index-fastest order; must not be all zero.
    """

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3, 4):
            raise ValueError(f"expected 2 to 4 parties, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise ValueError(f"every party dimension must be at least 2, got {dims}")
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.size != math.prod(dims):
            raise ValueError(
                f"amplitude count {amps.size} does not match dims {dims}"
            )
        if not np.any(amps):
            raise ValueError("state vector must be nonzero")
        amps.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @property
    def num_parties(self) -> int:
        return len(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per party."""
        return self.amps.reshape(self.dims)


@dataclass(frozen=True, eq=False)
class TripartiteState:
    """Tripartite state as a tuple of matrix slices along the first party.

    ``slices[i]`` is the coefficient matrix for first-party basis vector
    ``i``; rows index the second party, columns the third.
    """

    r_dim: int
    slices: tuple[np.ndarray, ...]

    def __post_init__(self):
        slices = tuple(np.array(s, dtype=complex) for s in self.slices)
        if len(slices) != self.r_dim:
            raise ValueError(
                f"r_dim {self.r_dim} does not match slice count {len(slices)}"
            )
        if not slices:
            raise ValueError("at least one slice required")
        shape = slices[0].shape
        if len(shape) != 2:
            raise ValueError("slices must be matrices")
        for s in slices:
            if s.shape != shape:
                raise ValueError("all slices must share dimensions")
            s.flags.writeable = False
        object.__setattr__(self, "r_dim", int(self.r_dim))
        object.__setattr__(self, "slices", slices)

    @property
    def slice_shape(self) -> tuple[int, int]:
        return self.slices[0].shape

    def stacked(self) -> np.ndarray:
        """All slices as one ``(r_dim, rows, cols)`` array."""
        return np.stack(self.slices)

    def slice_rank(self, rtol: float = DEFAULT_RTOL) -> int:
        """Rank of the vectorized-slice family (genuine first-party rank)."""
        flat = np.stack([s.reshape(-1) for s in self.slices])
        return numerical_rank(flat, rtol)


@dataclass(frozen=True)
class Bipartition:
    """Ordered split of four parties into a row pair and a column pair.

    The order inside each pair is preserved; it fixes the multi-index
    layout of the flattened matrix.
    """

    left: tuple[int, int]
    right: tuple[int, int]

    def __post_init__(self):
        left = tuple(int(p) for p in self.left)
        right = tuple(int(p) for p in self.right)
        if sorted(left + right) != [1, 2, 3, 4]:
            raise ValueError(
                f"bipartition must split parties 1..4, got {left} | {right}"
            )
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def label(self) -> str:
        return "{}{}-{}{}".format(*self.left, *self.right)


STANDARD_CUTS = (
    Bipartition((1, 2), (3, 4)),
    Bipartition((1, 3), (2, 4)),
    Bipartition((1, 4), (2, 3)),
)


@dataclass(frozen=True, eq=False)
class LocalOperatorTuple:
    """Invertible square operators A1..A4, one per party."""

    ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(m, dtype=complex) for m in self.ops)
        if len(ops) != 4:
            raise ValueError(f"expected 4 operators, got {len(ops)}")
        for k, m in enumerate(ops):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"operator {k + 1} is not square: shape {m.shape}")
            s = np.linalg.svd(m, compute_uv=False)
            if s[-1] <= OPERATOR_INVERTIBILITY_RTOL * s[0]:
                raise ValueError(
                    f"operator {k + 1} is numerically singular "
                    f"(condition {s[0] / max(s[-1], np.finfo(float).tiny):.3e})"
                )
            m.flags.writeable = False
        object.__setattr__(self, "ops", ops)


def contract_local_ops(
    amps: np.ndarray,
    dims: Sequence[int],
    mats: Sequence[np.ndarray],
) -> np.ndarray:
    """Low-level one-operator-per-party contraction on a raw amplitude vector.

    Performs no invertibility or zero-result checks; callers that need a
    valid :class:`PureState` should go through :func:`apply_local_ops`.
    """
    dims = tuple(int(d) for d in dims)
    mats = tuple(np.asarray(m, dtype=complex) for m in mats)
    if len(mats) != len(dims):
        raise ValueError(f"{len(mats)} operators supplied for {len(dims)} parties")
    for k, m in enumerate(mats):
        if m.shape != (dims[k], dims[k]):
            raise ValueError(
                f"operator {k + 1} has shape {m.shape}, party dimension is {dims[k]}"
            )
    t = np.asarray(amps, dtype=complex).reshape(dims)
    for k, m in enumerate(mats):
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [k])), 0, k)
    return t.reshape(-1)


def apply_local_ops(
    state: PureState,
    ops: Union[LocalOperatorTuple, Sequence[np.ndarray]],
) -> PureState:
    """Contract one operator onto each party of the state.

    Accepts a :class:`LocalOperatorTuple` or any sequence of square
    matrices matching the party count. The result is not renormalized.
    """
    mats = ops.ops if isinstance(ops, LocalOperatorTuple) else tuple(
        np.asarray(m, dtype=complex) for m in ops
    )
    return PureState(state.dims, contract_local_ops(state.amps, state.dims, mats))


def states_proportional(s1: PureState, s2: PureState, tol: float = 1e-10) -> bool:
    """True iff ``s1 == c * s2`` for some nonzero scalar, within ``tol``.

    The residual is measured relative to the largest amplitude of ``s1``.
    Mismatched dims return false rather than raising.
    """
    if s1.dims != s2.dims:
        return False
    a1, a2 = s1.amps, s2.amps
    c = np.vdot(a2, a1) / np.vdot(a2, a2)
    if c == 0:
        return False
    resid = np.max(np.abs(a1 - c * a2))
    return bool(resid <= tol * np.max(np.abs(a1)))


def _qubit_state(n_parties: int, entries: dict[int, complex]) -> PureState:
    amps = np.zeros(2**n_parties, dtype=complex)
    for idx, val in entries.items():
        amps[idx] = val
    return PureState((2,) * n_parties, amps)


def _require_params(name: str, params, count: int):
    if count == 0:
        if params:
            raise ValueError(f"state '{name}' takes no parameters")
        return ()
    if params is None or len(params) != count:
        got = 0 if params is None else len(params)
        raise ValueError(f"state '{name}' requires {count} parameters, got {got}")
    vals = tuple(complex(p) for p in params)
    if all(v == 0 for v in vals):
        raise ValueError(f"state '{name}' parameters must not be all zero")
    return vals


def make_state(name: str, params: Sequence[complex] = ()) -> PureState:
    """Build a named catalog state.

    Known names: ghz4, w4, ghz3, w3, cluster1d (all parameter-free) and
    psi_abcd, psi2_abcd (4 complex parameters each, kept literally: the
    parameterized families are not renormalized).
    """
    if name == "ghz4":
        _require_params(name, params, 0)
        return _qubit_state(4, {0b0000: _INV_SQRT2, 0b1111: _INV_SQRT2})
    if name == "w4":
        _require_params(name, params, 0)
        return _qubit_state(
            4, {0b0001: 0.5, 0b0010: 0.5, 0b0100: 0.5, 0b1000: 0.5}
        )
    if name == "ghz3":
        _require_params(name, params, 0)
        return _qubit_state(3, {0b000: _INV_SQRT2, 0b111: _INV_SQRT2})
    if name == "w3":
        _require_params(name, params, 0)
        return _qubit_state(3, {0b001: _INV_SQRT3, 0b010: _INV_SQRT3, 0b100: _INV_SQRT3})
    if name == "cluster1d":
        _require_params(name, params, 0)
        return _qubit_state(
            4, {0b0000: 0.5, 0b0101: 0.5, 0b1010: 0.5, 0b1111: -0.5}
        )
    if name == "psi_abcd":
        a, b, c, d = _require_params(name, params, 4)
        return _qubit_state(
            4,
            {
                0b0000: (a + d) / 2,
                0b0011: (a - d) / 2,
                0b0101: (b + c) / 2,
                0b0110: (b - c) / 2,
                0b1001: (b - c) / 2,
                0b1010: (b + c) / 2,
                0b1100: (a - d) / 2,
                0b1111: (a + d) / 2,
            },
        )
    if name == "psi2_abcd":
        a, b, c, d = _require_params(name, params, 4)
        return _qubit_state(4, {0b0000: a, 0b0111: -b, 0b1010: -c, 0b1101: d})
    raise ValueError(f"unknown state name '{name}'")


CATALOG_NAMES = ("ghz4", "w4", "ghz3", "w3", "cluster1d", "psi_abcd", "psi2_abcd")


def write_state_file(path: Union[str, os.PathLike], state: PureState) -> None:
    """Write a state as a JSON document with dims and [re, im] amplitude pairs."""
    doc = {
        "dims": list(state.dims),
        "amps": [[float(a.real), float(a.imag)] for a in state.amps],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def read_state_file(path: Union[str, os.PathLike]) -> PureState:
    """Read a state document written by :func:`write_state_file`.

    Raises ``ValueError`` on malformed documents (bad JSON, missing
    fields, non-pair amplitudes, or invalid state data).
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"not a valid state file: {exc}") from exc
    if not isinstance(doc, dict) or "dims" not in doc or "amps" not in doc:
        raise ValueError("state file must contain 'dims' and 'amps' fields")
    dims = doc["dims"]
    raw = doc["amps"]
    if not isinstance(dims, list) or not isinstance(raw, list):
        raise ValueError("'dims' and 'amps' must be lists")
    amps = []
    for pair in raw:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError("each amplitude must be a [re, im] pair")
        amps.append(complex(float(pair[0]), float(pair[1])))
    return PureState(tuple(int(d) for d in dims), np.array(amps, dtype=complex))
