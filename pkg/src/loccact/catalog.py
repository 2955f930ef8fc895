"""Encodings of the activation examples and their scripted protocols.

Every entry stores its states exactly as written (unnormalized, amplitudes
in {+-1, +-w, +-w^2} with w = exp(2 pi i / 3)), the distinguishing and
activating protocols, and a list of claims that :func:`verify_all` checks.

Two-qubit local spaces use the dictionary |00> = |0>, |01> = |1>,
|10> = |2>, |11> = |3>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from ._search import SearchBudget
from .classify import (
    RegistryEntry,
    certify_indistinguishable,
    check_activation,
    embed_2x2,
    match_monomial,
    replay_certificate,
)
from .errors import NotFoundError
from .measurements import LocalMeasurement, apply_outcome, basis_measurement, projector_measurement
from .protocols import Leaf, Node, ProtocolTree, simulate, verify_oplm_tree, walgate_two_state
from .states import (
    FactorizationSpec,
    StateSet,
    coarse_grain,
    equivalent_up_to_scale,
    has_local_redundancy,
    is_orthogonal_set,
)
from .tensor_core import OMEGA, DimensionSignature, basis_ket

W = OMEGA


@dataclass(frozen=True, eq=False)
class Claim:
    kind: str
    description: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    id: str
    title: str
    state_set: StateSet
    factorization: FactorizationSpec | None
    protocols: dict[str, ProtocolTree]
    activating: LocalMeasurement | None
    claims: tuple[Claim, ...]
    notes: tuple[str, ...] = ()


def _kets(dims):
    return lambda *idx: basis_ket(idx, dims)


def _rank1(party, vectors, labels):
    s = np.sqrt(0.5)
    return basis_measurement(party, [s * np.asarray(v, dtype=complex) for v in vectors], labels=labels)


def _lift(tree: ProtocolTree, party: str, iso: np.ndarray) -> ProtocolTree:
    """Re-express a tree acting on a subspace of ``party`` (via isometry ``iso``) on the full space.

    Every measurement by ``party`` gains one outcome, the projector onto the
    complement of the subspace, which ends in a terminal leaf.
    """
    if isinstance(tree, Leaf):
        return tree
    m = tree.measurement
    children = [_lift(c, party, iso) for c in tree.children]
    if m.party != party:
        return Node(m, tuple(children))
    ops = [iso @ M @ iso.conj().T for M in m.operators]
    ops.append(np.eye(iso.shape[0]) - iso @ iso.conj().T)
    lifted = LocalMeasurement(party, tuple(ops), m.outcome_labels + ("rest",))
    return Node(lifted, tuple(children) + (Leaf(),))


def _activation_tree(m: LocalMeasurement) -> Node:
    return Node(m, tuple(Leaf() for _ in range(m.num_outcomes)))


# ---------------------------------------------------------------------------
# entries
# ---------------------------------------------------------------------------


def _intro() -> CatalogEntry:
    # Alice holds A, A'; Bob holds B, B'. Party index = 2 * (A or B) + (A' or B').
    sig = DimensionSignature.of(4, 4)
    b2 = _kets((2, 2))
    bell = [b2(0, 0) + b2(1, 1), b2(0, 0) - b2(1, 1), b2(0, 1) + b2(1, 0), b2(0, 1) - b2(1, 0)]
    comp = [b2(0, 0), b2(0, 1), b2(1, 0), b2(1, 1)]
    vecs = []
    for psi, phi in zip(bell, comp):
        t = np.einsum("ab,cd->acbd", psi.reshape(2, 2), phi.reshape(2, 2))  # (A, A', B, B')
        vecs.append(t.reshape(16))
    labels = [f"Psi{i}Phi{i}" for i in range(1, 5)]
    s = StateSet.from_vectors(sig, vecs, labels, "intro-redundant")
    f = FactorizationSpec({"A": (2, 2), "B": (2, 2)}, {"A": ("A", "A'"), "B": ("B", "B'")})
    # A' and B' in the computational basis
    ma = projector_measurement("A", [[0, 2], [1, 3]], 4, labels=["A'=0", "A'=1"])
    mb = projector_measurement("B", [[0, 2], [1, 3]], 4, labels=["B'=0", "B'=1"])
    tree = Node(
        ma,
        (
            Node(mb, (Leaf(labels[0]), Leaf(labels[1]))),
            Node(mb, (Leaf(labels[2]), Leaf(labels[3]))),
        ),
    )
    claims = (
        Claim("orthogonal", "four orthogonal states", {"gram_diag": [2, 2, 2, 2]}),
        Claim(
            "redundancy",
            "orthogonal after discarding A'B' or after discarding AB",
            {"expected": True, "witnesses": [["A'", "B'"], ["A", "B"]]},
        ),
        Claim("protocol", "measuring A'B' in the computational basis identifies the state", {"protocol": "distinguishing"}),
    )
    return CatalogEntry(
        "intro-redundant",
        "Bell (x) computational basis set with local redundancy",
        s,
        f,
        {"distinguishing": tree},
        None,
        claims,
        ("Alice holds qubits A, A'; Bob holds B, B'; dims are (AA', BB').",),
    )


def _example1_set() -> StateSet:
    k = _kets((2, 4))
    vecs = [
        k(0, 0) + k(0, 2) + k(1, 1) - k(1, 3),
        k(0, 0) - k(0, 2) - k(1, 1) - k(1, 3),
        k(0, 1) - k(1, 2) - k(1, 0) - k(0, 3),
    ]
    return StateSet.from_vectors(DimensionSignature.of(2, 4), vecs, ["psi1", "psi2", "psi3"], "example1")


def _example1_tree(labels=("psi1", "psi2", "psi3")) -> Node:
    e = np.eye(4)
    ma = projector_measurement("A", [[0], [1]], 2, labels=["0", "1"])
    # Alice 0: Bob sees |0>+|2>, |0>-|2>, |1>-|3>; Alice 1: |1>-|3>, -(|1>+|3>), -(|0>+|2>)
    b0 = _rank1("B", [e[0] + e[2], e[0] - e[2], e[1] - e[3], e[1] + e[3]], ["0+2", "0-2", "1-3", "1+3"])
    b1 = _rank1("B", [e[1] - e[3], e[1] + e[3], e[0] + e[2], e[0] - e[2]], ["1-3", "1+3", "0+2", "0-2"])
    p1, p2, p3 = labels
    return Node(
        ma,
        (
            Node(b0, (Leaf(p1), Leaf(p2), Leaf(p3), Leaf())),
            Node(b1, (Leaf(p1), Leaf(p2), Leaf(p3), Leaf())),
        ),
    )


def _example1() -> CatalogEntry:
    s = _example1_set()
    act = projector_measurement("B", [[0, 1], [2, 3]], 4)
    claims = (
        Claim("orthogonal", "three orthogonal states", {"gram_diag": [4, 4, 4]}),
        Claim("redundancy", "not orthogonal after discarding any factor", {"expected": False}),
        Claim("protocol", "Alice measures {|0>,|1>}, then Bob", {"protocol": "distinguishing"}),
        Claim("activation", "Bob P_01/P_23 gives indistinguishable triples on both outcomes", {}),
    )
    return CatalogEntry(
        "example1",
        "C2 (x) C4, Bob holds two qubits",
        s,
        FactorizationSpec({"B": (2, 2)}, {"B": ("B1", "B2")}),
        {"distinguishing": _example1_tree(), "activating": _activation_tree(act)},
        act,
        claims,
    )


def _example2_set() -> StateSet:
    k = _kets((4, 4))
    vecs = [
        k(0, 0) + k(0, 2) + k(3, 1) - k(3, 3),
        k(0, 0) - k(0, 2) - k(3, 1) - k(3, 3),
        k(0, 1) - k(3, 2) - k(3, 0) - k(0, 3),
        k(1, 0) + k(1, 2) + k(2, 1) - k(2, 3),
        k(1, 0) - k(1, 2) - k(2, 1) - k(2, 3),
        k(1, 1) - k(2, 2) - k(2, 0) - k(1, 3),
    ]
    labels = [f"psi{i}" for i in range(1, 7)]
    return StateSet.from_vectors(DimensionSignature.of(4, 4), vecs, labels, "example2")


# Alice subspaces of the two outcomes, in the order matching example1's |0>, |1>
EXAMPLE2_SUBSPACES = ((0, 3), (1, 2))


def _example2() -> CatalogEntry:
    s = _example2_set()
    e = np.eye(4)
    root = projector_measurement("A", [[0, 3], [1, 2]], 4)
    subtrees = []
    for block, labels in zip(EXAMPLE2_SUBSPACES, (("psi1", "psi2", "psi3"), ("psi4", "psi5", "psi6"))):
        iso = e[:, list(block)]
        subtrees.append(_lift(_example1_tree(labels), "A", iso))
    act = projector_measurement("B", [[0, 1], [2, 3]], 4)
    claims = (
        Claim("orthogonal", "six orthogonal states", {"gram_diag": [4] * 6}),
        Claim("redundancy", "not orthogonal after discarding any factor", {"expected": False}),
        Claim("correspondence", "each Alice branch is example1 on a two-dimensional Alice subspace", {}),
        Claim("protocol", "Alice P_03/P_12, then the example1 tree on each branch", {"protocol": "distinguishing"}),
        Claim(
            "activation",
            "Bob P_01/P_23; each outcome contains two indistinguishable triplets",
            {"triplets": [[0, 1, 2], [3, 4, 5]]},
        ),
    )
    return CatalogEntry(
        "example2",
        "C4 (x) C4, each party holds two qubits",
        s,
        FactorizationSpec({"A": (2, 2), "B": (2, 2)}, {"A": ("A1", "A2"), "B": ("B1", "B2")}),
        {"distinguishing": Node(root, tuple(subtrees)), "activating": _activation_tree(act)},
        act,
        claims,
    )


def _example3_set() -> StateSet:
    k = _kets((5, 5))
    vecs = [
        sum(k(i, i) for i in range(5)),
        k(0, 0) - k(1, 1) - k(2, 2) - W * k(3, 3) - W**2 * k(4, 4),
        k(0, 1) + k(2, 3),
    ]
    return StateSet.from_vectors(DimensionSignature.of(5, 5), vecs, ["phi1", "phi2", "phi3"], "example3")


def _example4_set() -> StateSet:
    k = _kets((5, 5, 5))
    vecs = [
        sum(k(i, i, i) for i in range(5)),
        k(0, 0, 0) - k(1, 1, 1) - k(2, 2, 2) - W * k(3, 3, 3) - W**2 * k(4, 4, 4),
        k(0, 1, 1) + k(2, 3, 3),
    ]
    return StateSet.from_vectors(DimensionSignature.of(5, 5, 5), vecs, ["phi1", "phi2", "phi3"], "example4")


def _pair_subtree(branch: StateSet, seed: int) -> Node:
    return walgate_two_state(branch[0], branch[1], first_party="A", seed=seed).subtree


def _prime_pattern_tree(s: StateSet) -> Node:
    """Alice P_02/P_134; on P_02 Bob P_02/P_134; two-state leaves finish by the pair construction."""
    ma = projector_measurement("A", [[0, 2], [1, 3, 4]], 5)
    mb = projector_measurement("B", [[0, 2], [1, 3, 4]], 5)
    br_a02 = apply_outcome(s, ma, 0).transformed_set
    br_b02 = apply_outcome(br_a02, mb, 0).transformed_set
    br_b134 = apply_outcome(br_a02, mb, 1).transformed_set
    br_a134 = apply_outcome(s, ma, 1).transformed_set
    assert len(br_b134) == 1 and len(br_b02) == 2 and len(br_a134) == 2
    inner = Node(mb, (_pair_subtree(br_b02, 1), Leaf(br_b134.labels[0])))
    return Node(ma, (inner, _pair_subtree(br_a134, 2)))


def _example3() -> CatalogEntry:
    s = _example3_set()
    act = projector_measurement("A", [[0, 1], [2, 3, 4]], 5)
    claims = (
        Claim("orthogonal", "three orthogonal states", {"gram_diag": [5, 5, 2]}),
        Claim("redundancy", "prime local dimensions: whole-party discards only", {"expected": False}),
        Claim("protocol", "Alice P_02/P_134, Bob P_02/P_134, pair protocols at the leaves", {"protocol": "distinguishing"}),
        Claim("activation", "Alice P_01/P_234: C2xC2 triple and a registry triple", {}),
    )
    return CatalogEntry(
        "example3",
        "C5 (x) C5",
        s,
        None,
        {"distinguishing": _prime_pattern_tree(s), "activating": _activation_tree(act)},
        act,
        claims,
        ("ω = exp(2πi/3)",),
    )


def _example4() -> CatalogEntry:
    s = _example4_set()
    act = projector_measurement("A", [[0, 1], [2, 3, 4]], 5)
    claims = (
        Claim("orthogonal", "three orthogonal states", {"gram_diag": [5, 5, 2]}),
        Claim("redundancy", "prime local dimensions: whole-party discards only", {"expected": False}),
        Claim("protocol", "example3 pattern; Bob and Charlie finish each pair", {"protocol": "distinguishing"}),
        Claim("activation", "Alice P_01/P_234, certified through the A|BC grouping", {}),
        Claim("cross-entry", "A|BC branch sets are monomial images of example3 branch sets", {"other": "example3"}),
    )
    return CatalogEntry(
        "example4",
        "C5 (x) C5 (x) C5",
        s,
        None,
        {"distinguishing": _prime_pattern_tree(s), "activating": _activation_tree(act)},
        act,
        claims,
        ("ω = exp(2πi/3)", "the distinguishing protocol is constructed here by analogy with example3"),
    )


_BUILDERS: dict[str, Callable[[], CatalogEntry]] = {
    "intro-redundant": _intro,
    "example1": _example1,
    "example2": _example2,
    "example3": _example3,
    "example4": _example4,
}


def ids() -> list[str]:
    return list(_BUILDERS)


@lru_cache(maxsize=None)
def get(entry_id: str) -> CatalogEntry:
    try:
        builder = _BUILDERS[entry_id]
    except KeyError:
        raise NotFoundError(f"unknown catalog id {entry_id!r}; known: {', '.join(_BUILDERS)}") from None
    return builder()


def canonical_2x2_branch_sets() -> list[tuple[str, StateSet]]:
    """Embedded C2 (x) C2 triples produced by the activating measurements of examples 1 and 2."""
    out = []
    for eid, triplets in (("example1", [[0, 1, 2]]), ("example2", [[0, 1, 2], [3, 4, 5]])):
        e = get(eid)
        for k in range(e.activating.num_outcomes):
            br = apply_outcome(e.state_set, e.activating, k).transformed_set
            for t in triplets:
                emb = embed_2x2(br.subset(t))
                name = f"{eid}:{e.activating.outcome_labels[k]}:{''.join(str(i + 1) for i in t)}"
                out.append((name, emb.states))
    return out


# ---------------------------------------------------------------------------
# claim checks
# ---------------------------------------------------------------------------


class ClaimResult(NamedTuple):
    entry: str
    kind: str
    description: str
    passed: bool
    detail: str


def _check(entry: CatalogEntry, claim: Claim, budget: SearchBudget, seed: int) -> tuple[bool, str]:
    s = entry.state_set
    if claim.kind == "orthogonal":
        rep = is_orthogonal_set(s)
        diag = np.real(np.diag(s.gram()))
        ok_diag = np.allclose(diag, claim.params["gram_diag"], atol=1e-12, rtol=0)
        return rep.orthogonal and ok_diag, f"max overlap {rep.max_overlap:.2e}, gram diag {diag.round(12).tolist()}"
    if claim.kind == "redundancy":
        rep = has_local_redundancy(s, entry.factorization)
        ok = rep.redundant == claim.params["expected"]
        want = claim.params.get("witnesses")
        found = [set(w.discard) for w in rep.witnesses]
        if want:
            ok = ok and all(set(w) in found for w in want)
        return ok, f"redundant={rep.redundant}, witnesses={[list(w.discard) for w in rep.witnesses]}, checked {rep.checked} discard sets"
    if claim.kind == "protocol":
        tree = entry.protocols[claim.params["protocol"]]
        rep = simulate(tree, s)
        oplm = verify_oplm_tree(tree, s)
        return rep.perfect and oplm, f"perfect={rep.perfect}, max error {rep.max_error:.2e}, oplm tree={oplm}"
    if claim.kind == "activation":
        rep = check_activation(s, entry.activating, budget, seed)
        ok = rep.activating and rep.cardinality_preserved
        parts = []
        for b in rep.branches:
            ok = ok and b.verdict is not None and replay_certificate(b.states, b.verdict)
            parts.append(f"{b.outcome}: {b.size} states, {b.verdict.status.value} via {'>'.join(b.verdict.rule_names)}")
            for t in claim.params.get("triplets", []):
                chain = certify_indistinguishable(b.states.subset(t), allow_subsets=False)
                ok = ok and chain is not None
        return ok, "; ".join(parts)
    if claim.kind == "correspondence":
        ex1 = _example1_set()
        ok = True
        e = np.eye(4)
        for k, block in enumerate(EXAMPLE2_SUBSPACES):
            iso = e[:, list(block)]
            for j in range(3):
                lifted = np.kron(iso, np.eye(4)) @ ex1[j].amplitudes
                ok = ok and equivalent_up_to_scale(lifted, s[3 * k + j])
        return ok, "psi1-3 and psi4-6 are example1 on Alice subspaces {0,3} and {1,2}"
    if claim.kind == "cross-entry":
        other = get(claim.params["other"])
        ok = True
        for k in range(entry.activating.num_outcomes):
            mine = apply_outcome(s, entry.activating, k).transformed_set
            theirs = apply_outcome(other.state_set, other.activating, k).transformed_set
            grouped = coarse_grain(mine, [["A"], ["B", "C"]])
            ok = ok and match_monomial(grouped, RegistryEntry("ref", theirs, "cross-check")) is not None
        return ok, "A|BC branches match example3 branches"
    raise ValueError(f"unknown claim kind {claim.kind}")


def verify_entry(entry: CatalogEntry, budget: SearchBudget | None = None, seed: int = 0) -> list[ClaimResult]:
    budget = budget or SearchBudget()
    out = []
    for c in entry.claims:
        ok, detail = _check(entry, c, budget, seed)
        out.append(ClaimResult(entry.id, c.kind, c.description, bool(ok), detail))
    return out


def verify_all(budget: SearchBudget | None = None, seed: int = 0) -> list[ClaimResult]:
    out = []
    for eid in ids():
        out.extend(verify_entry(get(eid), budget, seed))
    return out
