"""Multipartite pure states, orthogonal sets and local redundancy."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInputError, SignatureError
from .tensor_core import (
    DEFAULT_TOL,
    RANK_RTOL,
    DimensionSignature,
    gram_matrix,
    party_tensor,
    reduced_state,
    schmidt_rank,
)


@dataclass(frozen=True, eq=False)
class MultipartiteState:
    """An unnormalized pure state over ``sig``."""

    sig: DimensionSignature
    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).ravel()
        if amp.size != self.sig.total:
            raise SignatureError(f"{amp.size} amplitudes do not match dims {self.sig.dims}")
        if not np.all(np.isfinite(amp)):
            raise SignatureError("non-finite amplitude")
        if not np.any(np.abs(amp) > 0):
            raise DegenerateInputError("state has no nonzero amplitude")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> np.ndarray:
        return self.amplitudes / np.sqrt(self.norm2)

    def party_tensor(self) -> np.ndarray:
        return party_tensor(self.amplitudes, self.sig)

    def with_label(self, label):
        return MultipartiteState(self.sig, self.amplitudes, label)

    def __repr__(self):
        return f"MultipartiteState(label={self.label!r}, dims={self.sig.dims})"


@dataclass(frozen=True, eq=False)
class StateSet:
    """Ordered, nonempty list of states sharing a signature."""

    sig: DimensionSignature
    states: tuple[MultipartiteState, ...]
    name: str | None = None

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise SignatureError("a state set must be nonempty")
        for s in states:
            if s.sig != self.sig:
                raise SignatureError(f"state {s.label!r} has signature {s.sig}, expected {self.sig}")
        object.__setattr__(self, "states", states)

    @classmethod
    def from_vectors(cls, sig, vectors, labels=None, name=None) -> "StateSet":
        vectors = list(vectors)
        if labels is None:
            labels = [f"psi{i + 1}" for i in range(len(vectors))]
        return cls(sig, tuple(MultipartiteState(sig, v, lab) for v, lab in zip(vectors, labels)), name)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label if s.label is not None else str(i) for i, s in enumerate(self.states))

    @property
    def vectors(self) -> np.ndarray:
        return np.stack([s.amplitudes for s in self.states])

    def gram(self) -> np.ndarray:
        return gram_matrix(self.vectors)

    def subset(self, indices: Iterable[int], name=None) -> "StateSet":
        return StateSet(self.sig, tuple(self.states[i] for i in indices), name)

    def normalized(self) -> "StateSet":
        return StateSet.from_vectors(self.sig, [s.normalized() for s in self.states], self.labels, self.name)

    def __repr__(self):
        return f"StateSet(name={self.name!r}, n={len(self)}, dims={self.sig.dims})"


@dataclass(frozen=True)
class FactorizationSpec:
    """Per-party split of a party's local dimension into tensor factors.

    ``splits`` maps a party label to the dimensions of its factors (e.g.
    ``{"B": (2, 2)}`` for Bob holding two qubits); ``names`` optionally
    names those factors.
    """

    splits: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    names: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def refine(self, sig: DimensionSignature) -> DimensionSignature:
        """Signature in which every party is split per ``splits``.

        Only valid when ``sig`` has one factor per party; row-major flattening
        means amplitudes need no reordering.
        """
        if len(sig.party_labels) != len(sig.dims):
            raise SignatureError("refinement expects one factor per party")
        dims, parties, names = [], [], []
        for d, p in zip(sig.dims, sig.parties):
            split = tuple(self.splits.get(p, (d,)))
            if int(np.prod(split)) != d:
                raise SignatureError(f"split {split} of party {p} does not multiply to {d}")
            given = self.names.get(p)
            if given is not None and len(given) != len(split):
                raise SignatureError(f"party {p} needs {len(split)} factor names")
            for k, dk in enumerate(split):
                dims.append(dk)
                parties.append(p)
                if given is not None:
                    names.append(given[k])
                else:
                    names.append(p if len(split) == 1 else f"{p}{k}")
        return DimensionSignature(tuple(dims), tuple(parties), tuple(names))

    def to_dict(self) -> dict:
        out = {"splits": {p: list(v) for p, v in self.splits.items()}}
        if self.names:
            out["names"] = {p: list(v) for p, v in self.names.items()}
        return out


class OrthogonalityReport(NamedTuple):
    orthogonal: bool
    witness: tuple[int, int, complex] | None
    max_overlap: float

    def __bool__(self):
        return self.orthogonal


def is_orthogonal_set(s: StateSet, tol: float = DEFAULT_TOL) -> OrthogonalityReport:
    """Pairwise orthogonality of ``s``.

    Overlaps are compared after normalization so the test does not depend on
    the unnormalized scale; the witness reports the raw inner product.
    """
    G = s.gram()
    d = np.sqrt(np.real(np.diag(G)))
    C = np.abs(G) / np.outer(d, d)
    n = len(s)
    worst = 0.0
    witness = None
    for i, j in combinations(range(n), 2):
        worst = max(worst, C[i, j])
        if witness is None and C[i, j] >= tol:
            witness = (i, j, complex(G[i, j]))
    return OrthogonalityReport(witness is None, witness, float(worst))


def _party_cut(sig: DimensionSignature, cut) -> list[int]:
    """Translate a cut given as party labels (or factor indices) to factor indices."""
    if isinstance(cut, str):
        cut = [cut]
    cut = list(cut)
    if all(isinstance(c, str) for c in cut):
        return sorted(i for p in cut for i in sig.factors_of(p))
    return sorted(int(c) for c in cut)


def is_product_across(psi: MultipartiteState, cut=None, rtol: float = RANK_RTOL) -> bool:
    """Whether ``psi`` has Schmidt rank 1 across ``cut | rest``.

    ``cut`` lists party labels (or factor indices) on one side; the default
    is the first party.
    """
    if cut is None:
        cut = [psi.sig.party_labels[0]]
    return schmidt_rank(psi.amplitudes, psi.sig, _party_cut(psi.sig, cut), rtol) == 1


class RedundancyWitness(NamedTuple):
    discard: tuple[str, ...]
    kind: str  # "whole-party" or "intra-party"
    max_overlap: float


class RedundancyReport(NamedTuple):
    redundant: bool
    witnesses: tuple[RedundancyWitness, ...]
    checked: int
    factor_names: tuple[str, ...]

    def __bool__(self):
        return self.redundant


def has_local_redundancy(
    s: StateSet, f: FactorizationSpec | None = None, tol: float = DEFAULT_TOL
) -> RedundancyReport:
    """Check every nonempty proper discard set of tensor factors.

    A discard set is a witness when the reduced states on the remaining
    factors have pairwise orthogonal supports, ``tr(rho_i rho_j) < tol``.
    """
    sig = s.sig if f is None else f.refine(s.sig)
    names = sig.factor_names
    vecs = [st.normalized() for st in s.states]
    nf = len(sig.dims)
    witnesses = []
    checked = 0
    for size in range(1, nf):
        for discard in combinations(range(nf), size):
            keep = [i for i in range(nf) if i not in discard]
            rhos = [reduced_state(v, sig, keep) for v in vecs]
            worst = 0.0
            for i, j in combinations(range(len(rhos)), 2):
                worst = max(worst, abs(np.trace(rhos[i] @ rhos[j])))
            checked += 1
            if worst < tol:
                parties = {sig.parties[i] for i in discard}
                whole = all(set(sig.factors_of(p)) <= set(discard) for p in parties)
                witnesses.append(
                    RedundancyWitness(
                        tuple(names[i] for i in discard), "whole-party" if whole else "intra-party", worst
                    )
                )
    return RedundancyReport(bool(witnesses), tuple(witnesses), checked, names)


def equivalent_up_to_scale(a, b, tol: float = DEFAULT_TOL) -> bool:
    """``|<a|b>|^2 >= (1 - tol) <a|a><b|b>``; accepts states or raw vectors."""
    va = a.amplitudes if isinstance(a, MultipartiteState) else np.asarray(a, dtype=complex).ravel()
    vb = b.amplitudes if isinstance(b, MultipartiteState) else np.asarray(b, dtype=complex).ravel()
    if va.size != vb.size:
        raise SignatureError("states have different dimensions")
    na = np.vdot(va, va).real
    nb = np.vdot(vb, vb).real
    if na == 0 or nb == 0:
        raise DegenerateInputError("zero vector")
    return abs(np.vdot(va, vb)) ** 2 >= (1 - tol) * na * nb


def local_supports(s: StateSet, rtol: float = RANK_RTOL) -> list[np.ndarray]:
    """Computational-basis indices carrying amplitude, per party."""
    tensors = np.stack([st.party_tensor() for st in s.states])
    scale = np.abs(tensors).max()
    out = []
    for ax in range(1, tensors.ndim):
        other = tuple(i for i in range(tensors.ndim) if i != ax)
        mags = np.abs(tensors).max(axis=other)
        out.append(np.flatnonzero(mags > rtol * scale))
    return out


def coarse_grain(s: StateSet, groups: Sequence[Sequence[str]]) -> StateSet:
    """Merge parties into groups; each group becomes one party named by concatenation."""
    sig = s.sig
    flat = [p for g in groups for p in g]
    if sorted(flat) != sorted(sig.party_labels):
        raise SignatureError(f"groups {groups} do not partition parties {sig.party_labels}")
    labels = sig.party_labels
    order = [labels.index(p) for p in flat]
    pdims = sig.party_dims
    new_dims, new_parties = [], []
    for g in groups:
        new_dims.append(int(np.prod([pdims[labels.index(p)] for p in g])))
        new_parties.append("".join(g))
    new_sig = DimensionSignature(tuple(new_dims), tuple(new_parties))
    vecs = [st.party_tensor().transpose(order).reshape(-1) for st in s.states]
    return StateSet.from_vectors(new_sig, vecs, s.labels, s.name)
