"""LOCC protocols as measurement trees.

A tree node holds a :class:`LocalMeasurement` and one child per outcome;
classical communication is implicit in the branching. Leaves either declare
a state label or are terminal (the protocol stops without a guess, which is
how activation endpoints are represented).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from ._search import SearchBudget, orthogonalizing_basis
from .errors import EmptyBranchError, PreconditionError, SearchBudgetError
from .measurements import ELIMINATION_RATIO, LocalMeasurement, apply_local, apply_outcome, basis_measurement, is_oplm
from .states import MultipartiteState, StateSet
from .tensor_core import DEFAULT_TOL, matrix_rank


@dataclass(frozen=True)
class Leaf:
    declare: str | None = None

    @property
    def terminal(self) -> bool:
        return self.declare is None


@dataclass(frozen=True, eq=False)
class Node:
    measurement: LocalMeasurement
    children: tuple

    def __post_init__(self):
        children = tuple(self.children)
        if len(children) != self.measurement.num_outcomes:
            raise ValueError(
                f"node has {len(children)} children for {self.measurement.num_outcomes} outcomes"
            )
        object.__setattr__(self, "children", children)


ProtocolTree = Union[Node, Leaf]


def iter_nodes(tree: ProtocolTree):
    """Depth-first iteration over internal nodes."""
    if isinstance(tree, Node):
        yield tree
        for c in tree.children:
            yield from iter_nodes(c)


def depth(tree: ProtocolTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.children)


class StateReport(NamedTuple):
    label: str
    success_probability: float
    leaf_distribution: dict[str, float]


class DiscriminationReport(NamedTuple):
    per_state: tuple[StateReport, ...]
    perfect: bool
    max_error: float
    conflicts: tuple[tuple[str, tuple[str, ...]], ...]
    tolerance: float

    def __bool__(self):
        return self.perfect

    def to_dict(self) -> dict:
        return {
            "perfect": self.perfect,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "conflicts": [{"path": p, "labels": list(ls)} for p, ls in self.conflicts],
            "states": [
                {"label": r.label, "success_probability": r.success_probability, "leaves": r.leaf_distribution}
                for r in self.per_state
            ],
        }


def _step(path: str, m: LocalMeasurement, k: int) -> str:
    s = f"{m.party}:{m.outcome_labels[k]}"
    return s if not path else f"{path}/{s}"


def simulate(tree: ProtocolTree, s: StateSet, tol: float = DEFAULT_TOL) -> DiscriminationReport:
    """Exact Born-rule propagation of every input down every branch."""
    labels = s.labels
    n = len(s)
    dist = [dict() for _ in range(n)]
    success = np.zeros(n)
    conflicts = []

    def walk(node, vecs, path):
        if isinstance(node, Leaf):
            arrived = []
            for i, v in vecs.items():
                p = float(np.vdot(v, v).real)
                dist[i][path or "."] = dist[i].get(path or ".", 0.0) + p
                arrived.append(i)
                if node.declare is not None and node.declare == labels[i]:
                    success[i] += p
            if node.declare is not None and len(arrived) > 1:
                conflicts.append((path or ".", tuple(labels[i] for i in arrived)))
            return
        m = node.measurement
        for k, child in enumerate(node.children):
            nxt = {}
            for i, v in vecs.items():
                w = apply_local(v, s.sig, m.party, m.operators[k])
                if np.vdot(w, w).real >= ELIMINATION_RATIO:
                    nxt[i] = w
            if nxt:
                walk(child, nxt, _step(path, m, k))

    walk(tree, {i: st.normalized() for i, st in enumerate(s.states)}, "")
    reports = tuple(StateReport(labels[i], float(success[i]), dist[i]) for i in range(n))
    max_error = float(np.max(1.0 - success))
    return DiscriminationReport(reports, bool(max_error <= tol), max_error, tuple(conflicts), tol)


def verify_oplm_tree(tree: ProtocolTree, s: StateSet, tol: float = DEFAULT_TOL) -> bool:
    """True iff each node's measurement is an OPLM for the states surviving to it."""

    def walk(node, current):
        if isinstance(node, Leaf):
            return True
        if not is_oplm(current, node.measurement, tol).oplm:
            return False
        for k, child in enumerate(node.children):
            try:
                branch = apply_outcome(current, node.measurement, k)
            except EmptyBranchError:
                continue
            if not walk(child, branch.transformed_set):
                return False
        return True

    return walk(tree, s)


# ---------------------------------------------------------------------------
# constructive one-way protocols
# ---------------------------------------------------------------------------


def party_matrices(s: StateSet, party: str) -> np.ndarray:
    """States as ``(n, d_party, rest)`` with the party's axis first."""
    ax = s.sig.party_labels.index(party)
    d = s.sig.party_dim(party)
    return np.stack([np.moveaxis(st.party_tensor(), ax, 0).reshape(d, -1) for st in s.states])


def _local_part(s: StateSet, party: str, tol: float):
    """Vectors ``eta_i`` if every state is ``|chi>_rest (x) |eta_i>_party`` for a common ``chi``."""
    T = party_matrices(s, party)
    n, d, rest = T.shape
    stacked = T.reshape(n * d, rest)
    if matrix_rank(stacked) != 1:
        return None
    _, _, Vh = np.linalg.svd(stacked, full_matrices=False)
    chi = Vh[0]
    etas = [t @ chi.conj() for t in T]
    norms = [np.linalg.norm(e) for e in etas]
    for i in range(n):
        for j in range(i + 1, n):
            if abs(np.vdot(etas[i], etas[j])) >= tol * norms[i] * norms[j]:
                return None
    return etas


def _final_measurement(s: StateSet, party: str, etas) -> Node:
    m = basis_measurement(party, etas, s.sig.party_dim(party), labels=list(s.labels))
    children = [Leaf(lab) for lab in s.labels]
    if m.num_outcomes > len(etas):
        children.append(Leaf())
    return Node(m, tuple(children))


def _measure_with(s, party, U, budget, rng, measured, tol):
    m = basis_measurement(party, [U[:, a] for a in range(U.shape[1])], labels=[f"e{a}" for a in range(U.shape[1])])
    children = []
    for k in range(m.num_outcomes):
        try:
            branch = apply_outcome(s, m, k)
        except EmptyBranchError:
            children.append(Leaf())
            continue
        child = build_one_way(branch.transformed_set, budget, rng, measured | {party}, tol)
        if child is None:
            return None
        children.append(child)
    return Node(m, tuple(children))


# rank-1 survivors after numerical bases carry overlaps near sqrt(threshold)
_LOCAL_TOL = 1e-6


def build_one_way(
    s: StateSet,
    budget: SearchBudget,
    rng: np.random.Generator,
    measured: frozenset = frozenset(),
    tol: float = _LOCAL_TOL,
) -> ProtocolTree | None:
    """Search for a protocol in which parties measure rank-1 bases in turn.

    Parties are tried in ascending label order; each party measures at most
    once per branch, so the depth is bounded by the number of parties.
    """
    if len(s) == 1:
        return Leaf(s.labels[0])
    parties = sorted(s.sig.party_labels)
    for p in parties:
        etas = _local_part(s, p, tol)
        if etas is not None:
            return _final_measurement(s, p, etas)
    for p in parties:
        if p in measured:
            continue
        T = party_matrices(s, p)
        for _ in range(budget.restarts):
            U, _obj = orthogonalizing_basis(T, rng, budget, restarts=1)
            if U is None:
                continue
            tree = _measure_with(s, p, U, budget, rng, measured, tol)
            if tree is not None:
                return tree
    return None


class WalgateResult(NamedTuple):
    basis: list[np.ndarray]
    subtree: Node
    objective: float
    party: str


def walgate_two_state(
    psi0: MultipartiteState,
    psi1: MultipartiteState,
    first_party: str | None = None,
    budget: SearchBudget = SearchBudget(),
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> WalgateResult:
    """Local protocol perfectly distinguishing two orthogonal pure states.

    ``first_party`` measures a rank-1 basis ``{|a>}`` for which the
    conditional states ``<a|psi0>`` and ``<a|psi1>`` are orthogonal; the
    remaining parties then finish recursively.

    Raises
    ------
    PreconditionError
        If the states are not orthogonal.
    SearchBudgetError
        If no basis is found within ``budget``.
    """
    if psi0.sig != psi1.sig:
        raise PreconditionError("states have different signatures")
    ov = abs(np.vdot(psi0.amplitudes, psi1.amplitudes)) / np.sqrt(psi0.norm2 * psi1.norm2)
    if ov >= tol:
        raise PreconditionError(f"states are not orthogonal (normalized overlap {ov:.3g})")
    labels = [psi0.label or "0", psi1.label or "1"]
    if labels[0] == labels[1]:
        labels = [labels[0] + "#0", labels[1] + "#1"]
    s = StateSet(psi0.sig, (psi0.with_label(labels[0]), psi1.with_label(labels[1])))
    party = first_party or sorted(s.sig.party_labels)[0]
    rng = np.random.default_rng(seed)
    T = party_matrices(s, party)
    best = np.inf
    for _ in range(budget.restarts):
        U, obj = orthogonalizing_basis(T, rng, budget, restarts=1)
        if U is None:
            best = min(best, obj)
            continue
        tree = _measure_with(s, party, U, budget, rng, frozenset(), _LOCAL_TOL)
        if tree is not None:
            return WalgateResult([U[:, a].copy() for a in range(U.shape[1])], tree, obj, party)
    raise SearchBudgetError(f"no orthogonalizing basis for {party} within {budget.restarts} restarts (best {best:.3g})")
