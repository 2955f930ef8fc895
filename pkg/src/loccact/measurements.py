"""Local measurements, orthogonality preservation and outcome application."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CompletenessError, EmptyBranchError, PartitionError, SignatureError
from .states import MultipartiteState, OrthogonalityReport, StateSet, is_orthogonal_set
from .tensor_core import DEFAULT_TOL, DimensionSignature, as_matrix, complete_basis, from_party_tensor, party_tensor

# squared-norm ratio below which a post-measurement state counts as eliminated
ELIMINATION_RATIO = 1e-12


@dataclass(frozen=True, eq=False)
class LocalMeasurement:
    """Measurement operators ``M_k`` acting on one party's local space.

    ``index_sets`` is set for diagonal projective measurements built by
    :func:`projector_measurement` and is used for serialization.
    """

    party: str
    operators: tuple[np.ndarray, ...]
    outcome_labels: tuple[str, ...]
    index_sets: tuple[tuple[int, ...], ...] | None = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        ops = tuple(as_matrix(m) for m in self.operators)
        if not ops:
            raise CompletenessError("a measurement needs at least one operator")
        d = ops[0].shape[0]
        for m in ops:
            if m.shape != (d, d):
                raise SignatureError("measurement operators must be square and equally sized")
            m.setflags(write=False)
        labels = tuple(str(x) for x in self.outcome_labels)
        if len(labels) != len(ops):
            raise SignatureError("operator count must equal label count")
        S = sum(m.conj().T @ m for m in ops)
        err = np.abs(S - np.eye(d)).max()
        if err > self.tol:
            raise CompletenessError(f"sum of M^dag M deviates from identity by {err:.3g}")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "outcome_labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def num_outcomes(self) -> int:
        return len(self.operators)

    def __repr__(self):
        return f"LocalMeasurement(party={self.party!r}, outcomes={list(self.outcome_labels)})"


def projector_label(indices) -> str:
    return "P_" + "".join(str(i) for i in indices)


def projector_measurement(party: str, index_sets: Sequence[Sequence[int]], local_dim: int, labels=None) -> LocalMeasurement:
    """Diagonal 0/1 projectors, one per index set, e.g. ``P_01`` and ``P_23``."""
    sets = [tuple(sorted(int(i) for i in s)) for s in index_sets]
    flat = [i for s in sets for i in s]
    if any(not s for s in sets):
        raise PartitionError("empty index set")
    if len(flat) != len(set(flat)):
        raise PartitionError(f"index sets {sets} overlap")
    if set(flat) != set(range(local_dim)):
        raise PartitionError(f"index sets {sets} do not cover 0..{local_dim - 1}")
    ops = []
    for s in sets:
        P = np.zeros((local_dim, local_dim), dtype=complex)
        P[s, s] = 1.0
        ops.append(P)
    if labels is None:
        labels = [projector_label(s) for s in sets]
    return LocalMeasurement(party, tuple(ops), tuple(labels), tuple(sets))


def identity_measurement(party: str, local_dim: int) -> LocalMeasurement:
    return projector_measurement(party, [range(local_dim)], local_dim, labels=["I"])


def basis_measurement(party: str, vectors: Sequence[np.ndarray], local_dim: int | None = None, labels=None) -> LocalMeasurement:
    """Rank-1 projectors onto pairwise orthogonal ``vectors``.

    When the vectors do not span the space, one extra outcome ``rest``
    projects onto the orthogonal complement.
    """
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    d = local_dim or vectors[0].size
    n = len(vectors)
    B = complete_basis(vectors, d)
    ops = [np.outer(B[:, k], B[:, k].conj()) for k in range(n)]
    if labels is None:
        labels = [f"e{k}" for k in range(n)]
    labels = list(labels)
    if n < d:
        ops.append(B[:, n:] @ B[:, n:].conj().T)
        labels.append("rest")
    return LocalMeasurement(party, tuple(ops), tuple(labels))


def _check_compatible(sig: DimensionSignature, m: LocalMeasurement):
    if m.party not in sig.party_labels:
        raise SignatureError(f"party {m.party!r} not in {sig.party_labels}")
    if sig.party_dim(m.party) != m.dim:
        raise SignatureError(f"measurement dimension {m.dim} != local dimension {sig.party_dim(m.party)} of {m.party}")


def apply_local(psi, sig: DimensionSignature, party: str, op: np.ndarray) -> np.ndarray:
    """Apply ``op`` on ``party`` (identity elsewhere) to the amplitude vector ``psi``."""
    t = party_tensor(psi, sig)
    ax = sig.party_labels.index(party)
    t = np.moveaxis(np.tensordot(op, t, axes=([1], [ax])), 0, ax)
    return from_party_tensor(t, sig)


@dataclass(frozen=True, eq=False)
class OutcomeBranch:
    measurement: LocalMeasurement
    outcome_index: int
    transformed_set: StateSet
    survival_flags: tuple[bool, ...]
    probabilities: tuple[float, ...]

    @property
    def label(self) -> str:
        return self.measurement.outcome_labels[self.outcome_index]


def apply_outcome(s: StateSet, m: LocalMeasurement, k: int) -> OutcomeBranch:
    """Map every state through ``M_k`` and keep the survivors in order.

    Raises
    ------
    EmptyBranchError
        If outcome ``k`` eliminates every input state.
    """
    _check_compatible(s.sig, m)
    op = m.operators[k]
    survivors, flags, probs = [], [], []
    for st in s.states:
        out = apply_local(st.amplitudes, s.sig, m.party, op)
        n2 = float(np.vdot(out, out).real)
        alive = n2 >= ELIMINATION_RATIO * st.norm2
        flags.append(alive)
        probs.append(n2 / st.norm2 if alive else 0.0)
        if alive:
            survivors.append(MultipartiteState(s.sig, out, st.label))
    if not survivors:
        raise EmptyBranchError(f"outcome {m.outcome_labels[k]} eliminates every state")
    name = f"{s.name}|{m.party}:{m.outcome_labels[k]}" if s.name else None
    return OutcomeBranch(m, k, StateSet(s.sig, tuple(survivors), name), tuple(flags), tuple(probs))


def is_nontrivial(m: LocalMeasurement, tol: float = DEFAULT_TOL) -> bool:
    """True when some operator is not a scalar multiple of the identity."""
    d = m.dim
    eye = np.eye(d)
    return any(np.abs(M - np.trace(M) / d * eye).max() > tol for M in m.operators)


class OplmReport(NamedTuple):
    oplm: bool
    nontrivial: bool
    per_outcome: tuple[OrthogonalityReport | None, ...]  # None: outcome eliminates everything

    def __bool__(self):
        return self.oplm


def is_oplm(s: StateSet, m: LocalMeasurement, tol: float = DEFAULT_TOL) -> OplmReport:
    """Whether every outcome of ``m`` leaves the surviving states pairwise orthogonal."""
    per = []
    for k in range(m.num_outcomes):
        try:
            br = apply_outcome(s, m, k)
        except EmptyBranchError:
            per.append(None)
            continue
        per.append(is_orthogonal_set(br.transformed_set, tol))
    ok = all(r is None or r.orthogonal for r in per)
    return OplmReport(ok, is_nontrivial(m, tol), tuple(per))


def outcome_probability(psi: MultipartiteState, m: LocalMeasurement, k: int) -> float:
    """Born-rule probability of outcome ``k`` for the normalized ``psi``."""
    _check_compatible(psi.sig, m)
    out = apply_local(psi.amplitudes, psi.sig, m.party, m.operators[k])
    return float(np.vdot(out, out).real / psi.norm2)


def outcome_probabilities(psi: MultipartiteState, m: LocalMeasurement) -> np.ndarray:
    return np.array([outcome_probability(psi, m, k) for k in range(m.num_outcomes)])
