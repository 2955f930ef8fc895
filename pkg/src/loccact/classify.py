"""Certified classification of orthogonal sets under LOCC.

Rules, applied in order; the first certified verdict wins:

R1  a single state is trivially distinguishable
R2  two orthogonal pure states are distinguishable (constructive search)
R3  three or four states in C2 (x) C2: product-state counting, both ways
R4  a set containing an indistinguishable subset is indistinguishable
R5  sets whose local supports are at most 2-dimensional embed into C2 (x) C2
R6  three or more parties: indistinguishable under a coarse-graining into
    two groups implies indistinguishable
R7  match against a registry of known indistinguishable sets, up to local
    permutations and phases
R8  bounded one-way protocol search; failure yields Unknown
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import NamedTuple

import numpy as np

from ._search import SearchBudget, orthogonalizing_basis
from .errors import EmptyBranchError, PreconditionError, SearchBudgetError
from .measurements import LocalMeasurement, apply_outcome, is_oplm
from .protocols import Leaf, ProtocolTree, build_one_way, party_matrices, simulate, walgate_two_state
from .states import (
    StateSet,
    coarse_grain,
    equivalent_up_to_scale,
    is_orthogonal_set,
    is_product_across,
)
from .tensor_core import (
    DEFAULT_TOL,
    OMEGA,
    RANK_RTOL,
    DimensionSignature,
    basis_ket,
    complete_basis,
    ket,
    random_ket,
    random_unitary,
)


class Status(str, enum.Enum):
    DISTINGUISHABLE = "Distinguishable"
    INDISTINGUISHABLE = "Indistinguishable"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class RuleStep:
    rule: str
    detail: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Verdict:
    status: Status
    rules: tuple[RuleStep, ...]
    protocol: ProtocolTree | None = None
    evidence: dict | None = None

    @property
    def rule_names(self) -> tuple[str, ...]:
        return tuple(r.rule for r in self.rules)


# ---------------------------------------------------------------------------
# R5: embedding into C2 (x) C2
# ---------------------------------------------------------------------------


class Embedding(NamedTuple):
    states: StateSet
    alice: np.ndarray  # d_A x 2 isometry
    bob: np.ndarray  # d_B x 2 isometry


def _support_isometry(mats: list[np.ndarray], d: int) -> np.ndarray | None:
    """Orthonormal basis (columns, padded to 2) of the joint column space, or None if > 2-dim."""
    stacked = np.hstack(mats)
    scale = np.abs(stacked).max()
    idx = np.flatnonzero(np.abs(stacked).max(axis=1) > RANK_RTOL * scale)
    if len(idx) <= 2:
        # support spanned by computational basis vectors: keep them
        cols = [ket(i, d) for i in idx]
        for i in range(d):
            if len(cols) == 2:
                break
            if i not in idx:
                cols.append(ket(i, d))
        cols.sort(key=lambda c: int(np.argmax(np.abs(c))))
        return np.column_stack(cols)
    U, sv, _ = np.linalg.svd(stacked, full_matrices=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0]))
    if rank > 2:
        return None
    V = U[:, :rank]
    if rank < 2:
        V = complete_basis([V[:, 0]], d)[:, :2]
    return V


def embed_2x2(s: StateSet) -> Embedding | None:
    """Rewrite a bipartite set in orthonormal bases of its (at most 2-dim) local supports."""
    sig = s.sig
    if len(sig.party_labels) != 2:
        return None
    dA, dB = sig.party_dims
    mats = [st.party_tensor() for st in s.states]
    VA = _support_isometry(mats, dA)
    if VA is None:
        return None
    VB = _support_isometry([m.T for m in mats], dB)
    if VB is None:
        return None
    new = [VA.conj().T @ m @ VB.conj() for m in mats]
    sig2 = DimensionSignature((2, 2), sig.party_labels)
    return Embedding(StateSet.from_vectors(sig2, [m.ravel() for m in new], s.labels, s.name), VA, VB)


# ---------------------------------------------------------------------------
# R3: product counting in C2 (x) C2
# ---------------------------------------------------------------------------


def count_products(s: StateSet) -> int:
    first = s.sig.party_labels[0]
    return sum(is_product_across(st, [first]) for st in s.states)


def product_rule(s: StateSet) -> tuple[Status, int]:
    """Verdict for 3 or 4 orthogonal states in C2 (x) C2 and the product count.

    Three states: distinguishable iff at least two are product.
    Four states: distinguishable iff all are product.
    """
    if s.sig.party_dims != (2, 2) or len(s) not in (3, 4):
        raise PreconditionError("product counting applies to 3 or 4 states in C2 (x) C2")
    k = count_products(s)
    ok = k >= 2 if len(s) == 3 else k == 4
    return (Status.DISTINGUISHABLE if ok else Status.INDISTINGUISHABLE), k


# ---------------------------------------------------------------------------
# R7: registry and local monomial matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegistryEntry:
    key: str
    states: StateSet
    tag: str
    tol: float = 1e-8


def _hssh_set() -> StateSet:
    sig = DimensionSignature.of(5, 5)
    k = lambda a, b: basis_ket((a, b), (5, 5))  # noqa: E731
    w = OMEGA
    return StateSet.from_vectors(
        sig,
        [k(2, 2) + k(3, 3) + k(4, 4), k(2, 2) + w * k(3, 3) + w**2 * k(4, 4), k(2, 3)],
        ["h1", "h2", "h3"],
        "hssh-triple",
    )


def _bell_triple() -> StateSet:
    sig = DimensionSignature.of(2, 2)
    k = lambda a, b: basis_ket((a, b), (2, 2))  # noqa: E731
    return StateSet.from_vectors(
        sig, [k(0, 0) + k(1, 1), k(0, 0) - k(1, 1), k(0, 1) - k(1, 0)], ["b1", "b2", "b3"], "bell-triple"
    )


REGISTRY: tuple[RegistryEntry, ...] = (
    RegistryEntry(
        "hssh-triple",
        _hssh_set(),
        "Horodecki-Sen(De)-Sen-Horodecki 2003: not perfectly distinguishable by LOCC",
    ),
    RegistryEntry("bell-triple", _bell_triple(), "Walgate-Hardy 2002: zero product states among three in C2xC2"),
)


def _integer_echelon(A: np.ndarray, rhs: np.ndarray):
    """Row-reduce an integer matrix with unimodular operations, carrying angles mod 2 pi."""
    A = A.astype(np.int64).copy()
    rhs = rhs.astype(float).copy()
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i, c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i, c]))
            if p != r:
                A[[r, p]] = A[[p, r]]
                rhs[[r, p]] = rhs[[p, r]]
            done = True
            for i in range(r + 1, m):
                if A[i, c] != 0:
                    q = A[i, c] // A[r, c]
                    A[i] -= q * A[r]
                    rhs[i] -= q * rhs[r]
                    if A[i, c] != 0:
                        done = False
            if done:
                break
        if r < m and A[r, c] != 0:
            if A[r, c] < 0:
                A[r] = -A[r]
                rhs[r] = -rhs[r]
            pivots.append((r, c))
            r += 1
    return A, rhs, pivots, r


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def solve_phases(equations: list[tuple[int, ...]], angles: np.ndarray, nvars: int, tol: float = 1e-7):
    """Solve ``sum_{v in eq} x_v = angle (mod 2 pi)`` for every equation.

    Every coefficient is 1. Returns the angle vector or None if the system
    is inconsistent.
    """
    A = np.zeros((len(equations), nvars), dtype=np.int64)
    for row, eq in enumerate(equations):
        for v in eq:
            A[row, v] += 1
    H, rhs, pivots, rank = _integer_echelon(A, np.asarray(angles, dtype=float))
    if np.any(np.abs(_wrap(rhs[rank:])) > tol):
        return None
    x = np.zeros(nvars)
    for r, c in reversed(pivots):
        rest = H[r] @ x - H[r, c] * x[c]
        x[c] = (rhs[r] - rest) / H[r, c]
    if np.any(np.abs(_wrap(A @ x - angles)) > tol):
        return None
    return x


class MonomialMatch(NamedTuple):
    entry: str
    transpose: bool
    state_order: tuple[int, ...]  # set state k corresponds to registry state state_order[k]
    alice_map: tuple[tuple[int, int], ...]  # (set index, registry index)
    bob_map: tuple[tuple[int, int], ...]
    alice_phases: tuple[float, ...]
    bob_phases: tuple[float, ...]

    def to_params(self) -> dict:
        return {
            "entry": self.entry,
            "transpose": self.transpose,
            "state_order": list(self.state_order),
            "alice_map": [list(p) for p in self.alice_map],
            "bob_map": [list(p) for p in self.bob_map],
            "alice_phases": [float(x) for x in self.alice_phases],
            "bob_phases": [float(x) for x in self.bob_phases],
        }


def _supports(mats, tol):
    scale = max(np.abs(m).max() for m in mats)
    rows = np.flatnonzero(np.max([np.abs(m).max(axis=1) for m in mats], axis=0) > tol * scale)
    cols = np.flatnonzero(np.max([np.abs(m).max(axis=0) for m in mats], axis=0) > tol * scale)
    return rows, cols


def match_monomial(s: StateSet, entry: RegistryEntry) -> MonomialMatch | None:
    """Find local permutations and diagonal phases mapping ``entry`` onto ``s``.

    Each state may additionally carry its own nonzero scale. Parties may be
    swapped. Brute force over permutations of the local supports.
    """
    ref = entry.states
    if len(s) != len(ref) or len(s.sig.party_labels) != 2 or len(ref.sig.party_labels) != 2:
        return None
    n = len(s)
    X = [st.party_tensor() for st in ref.states]
    Y0 = [st.party_tensor() for st in s.states]
    # normalize so magnitude comparisons share a scale
    X = [x / np.linalg.norm(x) for x in X]
    Y0 = [y / np.linalg.norm(y) for y in Y0]
    xr, xc = _supports(X, RANK_RTOL)
    Xr = np.stack([x[np.ix_(xr, xc)] for x in X])
    xpat = np.abs(Xr) > RANK_RTOL
    for transpose in (False, True):
        Y = [y.T for y in Y0] if transpose else Y0
        yr, yc = _supports(Y, RANK_RTOL)
        if len(yr) != len(xr) or len(yc) != len(xc):
            continue
        Yr = np.stack([y[np.ix_(yr, yc)] for y in Y])
        ypat = np.abs(Yr) > RANK_RTOL
        na, nb = len(xr), len(xc)
        for order in permutations(range(n)):
            for pa in permutations(range(na)):
                Xa = Xr[list(order)][:, list(pa), :]
                pa_pat = xpat[list(order)][:, list(pa), :]
                for pb in permutations(range(nb)):
                    if not np.array_equal(pa_pat[:, :, list(pb)], ypat):
                        continue
                    Xp = Xa[:, :, list(pb)]
                    ok = True
                    eqs, angles = [], []
                    for k in range(n):
                        nzk = np.argwhere(ypat[k])
                        ratios = np.abs(Yr[k][ypat[k]]) / np.abs(Xp[k][ypat[k]])
                        if np.ptp(ratios) > entry.tol * ratios.max():
                            ok = False
                            break
                        for a, b in nzk:
                            eqs.append((k, n + a, n + na + b))
                            angles.append(np.angle(Yr[k, a, b]) - np.angle(Xp[k, a, b]))
                    if not ok:
                        continue
                    x = solve_phases(eqs, np.array(angles), n + na + nb)
                    if x is None:
                        continue
                    m = MonomialMatch(
                        entry.key,
                        transpose,
                        tuple(order),
                        tuple((int(yr[a]), int(xr[pa[a]])) for a in range(na)),
                        tuple((int(yc[b]), int(xc[pb[b]])) for b in range(nb)),
                        tuple(x[n : n + na]),
                        tuple(x[n + na :]),
                    )
                    if replay_monomial(s, m, entry):
                        return m
    return None


def replay_monomial(s: StateSet, m: MonomialMatch, entry: RegistryEntry | None = None) -> bool:
    """Apply the recorded monomial map to the registry set and compare state by state."""
    if entry is None:
        entry = _registry_entry(m.entry)
    ref = entry.states
    dA, dB = s.sig.party_dims
    if m.transpose:
        dA, dB = dB, dA
    for k, st in enumerate(s.states):
        X = ref.states[m.state_order[k]].party_tensor()
        Y = np.zeros((dA, dB), dtype=complex)
        for (ya, xa), pha in zip(m.alice_map, m.alice_phases):
            for (yb, xb), phb in zip(m.bob_map, m.bob_phases):
                Y[ya, yb] = np.exp(1j * (pha + phb)) * X[xa, xb]
        target = st.party_tensor().T if m.transpose else st.party_tensor()
        if not equivalent_up_to_scale(Y.ravel(), target.ravel(), entry.tol):
            return False
    return True


def _registry_entry(key: str) -> RegistryEntry:
    for e in REGISTRY:
        if e.key == key:
            return e
    raise KeyError(key)


def match_registry(s: StateSet) -> MonomialMatch | None:
    for entry in REGISTRY:
        m = match_monomial(s, entry)
        if m is not None:
            return m
    return None


# ---------------------------------------------------------------------------
# indistinguishability certificates
# ---------------------------------------------------------------------------


def bipartitions(parties) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Unordered splits of the parties into two nonempty groups, smallest first group first."""
    parties = tuple(parties)
    first, rest = parties[0], parties[1:]
    out = []
    for k in range(0, len(rest)):
        for extra in combinations(rest, k):
            left = (first,) + extra
            right = tuple(p for p in parties if p not in left)
            out.append((left, right))
    return out


def _bipartite_exact(s: StateSet) -> list[RuleStep] | None:
    n = len(s)
    if n in (3, 4):
        direct = s.sig.party_dims == (2, 2)
        emb = None if direct else embed_2x2(s)
        target = s if direct else (emb.states if emb is not None else None)
        if target is not None:
            status, k = product_rule(target)
            if status is Status.INDISTINGUISHABLE:
                steps = []
                if emb is not None:
                    steps.append(
                        RuleStep(
                            "R5",
                            "local supports are at most 2-dimensional; embed into C2xC2",
                            {"alice_isometry_shape": list(emb.alice.shape), "bob_isometry_shape": list(emb.bob.shape)},
                        )
                    )
                need = "at least 2" if n == 3 else "all 4"
                steps.append(
                    RuleStep(
                        "R3",
                        f"{k} of {n} states are product; distinguishability needs {need}",
                        {"n_states": n, "product_count": k},
                    )
                )
                return steps
    m = match_registry(s)
    if m is not None:
        entry = _registry_entry(m.entry)
        return [RuleStep("R7", f"local monomial image of registry set {m.entry} ({entry.tag})", m.to_params())]
    return None


def certify_indistinguishable(s: StateSet, allow_subsets: bool = True) -> list[RuleStep] | None:
    """Rule chain proving ``s`` locally indistinguishable, or None."""
    n = len(s)
    if n < 3:
        return None
    parties = s.sig.party_labels
    if len(parties) == 2:
        chain = _bipartite_exact(s)
        if chain:
            return chain
        if allow_subsets:
            for size in range(3, n):
                for idx in combinations(range(n), size):
                    sub = certify_indistinguishable(s.subset(idx), allow_subsets=False)
                    if sub:
                        step = RuleStep(
                            "R4",
                            f"subset {[s.labels[i] for i in idx]} is indistinguishable",
                            {"indices": list(idx), "labels": [s.labels[i] for i in idx]},
                        )
                        return [step] + sub
        return None
    if len(s.sig.dims) != len(parties):
        s = StateSet.from_vectors(
            s.sig.party_level(), [st.party_tensor().ravel() for st in s.states], s.labels, s.name
        )
    for left, right in bipartitions(parties):
        bip = coarse_grain(s, [left, right])
        chain = certify_indistinguishable(bip, allow_subsets)
        if chain:
            step = RuleStep(
                "R6",
                f"coarse-grained to {''.join(left)}|{''.join(right)}",
                {"groups": [list(left), list(right)]},
            )
            return [step] + chain
    return None


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def protocol_search(s: StateSet, budget: SearchBudget = SearchBudget(), seed: int = 0) -> ProtocolTree | None:
    """R8: bounded one-way search; returns a tree that simulates perfectly, or None."""
    tree = build_one_way(s, budget, np.random.default_rng(seed))
    if tree is None or not simulate(tree, s).perfect:
        return None
    return tree


def classify(s: StateSet, budget: SearchBudget | None = None, seed: int = 0, tol: float = DEFAULT_TOL) -> Verdict:
    """Classify an orthogonal set as locally distinguishable, indistinguishable or unknown."""
    budget = budget or SearchBudget()
    if not is_orthogonal_set(s, tol):
        raise PreconditionError("classify requires an orthogonal set")
    n = len(s)
    if n == 1:
        return Verdict(Status.DISTINGUISHABLE, (RuleStep("R1", "single state", {}),), Leaf(s.labels[0]))
    if n == 2:
        try:
            res = walgate_two_state(s[0], s[1], budget=budget, seed=seed, tol=tol)
        except SearchBudgetError as exc:
            return Verdict(
                Status.UNKNOWN,
                (RuleStep("R2", "two orthogonal states; construction failed within budget", {}),),
                evidence={"error": str(exc), "budget": budget.to_dict(), "seed": seed},
            )
        step = RuleStep(
            "R2",
            "two orthogonal pure states",
            {"first_party": res.party, "objective": res.objective},
        )
        return Verdict(Status.DISTINGUISHABLE, (step,), res.subtree)

    chain = certify_indistinguishable(s)
    if chain:
        return Verdict(Status.INDISTINGUISHABLE, tuple(chain))

    pre = []
    if len(s.sig.party_labels) == 2 and n in (3, 4):
        emb = s if s.sig.party_dims == (2, 2) else embed_2x2(s)
        target = emb if isinstance(emb, StateSet) else (emb.states if emb is not None else None)
        if target is not None:
            status, k = product_rule(target)
            pre.append(RuleStep("R3", f"{k} of {n} states are product: distinguishable", {"n_states": n, "product_count": k}))

    tree = protocol_search(s, budget, seed)
    if tree is not None:
        step = RuleStep("R8", "one-way protocol found by search", {"budget": budget.to_dict(), "seed": seed})
        return Verdict(Status.DISTINGUISHABLE, tuple(pre + [step]), tree)
    evidence = {
        "search": "one-way rank-1 bases, parties in ascending order",
        "budget": budget.to_dict(),
        "seed": seed,
        "parties": sorted(s.sig.party_labels),
    }
    return Verdict(Status.UNKNOWN, tuple(pre + [RuleStep("R8", "search exhausted", {})]), evidence=evidence)


def replay_certificate(s: StateSet, verdict: Verdict, tol: float = DEFAULT_TOL) -> bool:
    """Re-verify a verdict independently of how it was produced."""
    if verdict.status is Status.DISTINGUISHABLE:
        return verdict.protocol is not None and simulate(verdict.protocol, s, tol).perfect
    if verdict.status is Status.UNKNOWN:
        return True
    current = s
    for step in verdict.rules:
        if step.rule == "R4":
            idx = step.params["indices"]
            if len(idx) >= len(current):
                return False
            current = current.subset(idx)
        elif step.rule == "R6":
            groups = step.params["groups"]
            if len(current.sig.dims) != len(current.sig.party_labels):
                current = StateSet.from_vectors(
                    current.sig.party_level(), [st.party_tensor().ravel() for st in current.states], current.labels
                )
            current = coarse_grain(current, groups)
        elif step.rule == "R5":
            emb = embed_2x2(current)
            if emb is None:
                return False
            current = emb.states
        elif step.rule == "R3":
            if current.sig.party_dims != (2, 2) or not is_orthogonal_set(current, tol):
                return False
            status, k = product_rule(current)
            return status is Status.INDISTINGUISHABLE and k == step.params["product_count"]
        elif step.rule == "R7":
            p = step.params
            m = MonomialMatch(
                p["entry"],
                p["transpose"],
                tuple(p["state_order"]),
                tuple(tuple(x) for x in p["alice_map"]),
                tuple(tuple(x) for x in p["bob_map"]),
                tuple(p["alice_phases"]),
                tuple(p["bob_phases"]),
            )
            return replay_monomial(current, m)
        else:
            return False
    return False


# ---------------------------------------------------------------------------
# activation
# ---------------------------------------------------------------------------


class BranchResult(NamedTuple):
    outcome: str
    size: int
    verdict: Verdict | None  # None: outcome never occurs
    states: StateSet | None


class ActivationReport(NamedTuple):
    activating: bool
    cardinality_preserved: bool
    branches: tuple[BranchResult, ...]

    @property
    def per_branch(self) -> tuple[Verdict | None, ...]:
        return tuple(b.verdict for b in self.branches)

    def __bool__(self):
        return self.activating


def check_activation(
    s: StateSet, m: LocalMeasurement, budget: SearchBudget | None = None, seed: int = 0, tol: float = DEFAULT_TOL
) -> ActivationReport:
    """Whether every outcome of the OPLM ``m`` keeps all states and lands on an indistinguishable set."""
    rep = is_oplm(s, m, tol)
    if not rep.oplm:
        raise PreconditionError("measurement is not orthogonality preserving for this set")
    branches = []
    for k in range(m.num_outcomes):
        try:
            br = apply_outcome(s, m, k)
        except EmptyBranchError:
            branches.append(BranchResult(m.outcome_labels[k], 0, None, None))
            continue
        v = classify(br.transformed_set, budget, seed, tol)
        branches.append(BranchResult(m.outcome_labels[k], len(br.transformed_set), v, br.transformed_set))
    reached = [b for b in branches if b.verdict is not None]
    preserved = all(b.size == len(s) for b in reached)
    activating = bool(reached) and preserved and all(b.verdict.status is Status.INDISTINGUISHABLE for b in reached)
    return ActivationReport(activating, preserved, tuple(branches))


# ---------------------------------------------------------------------------
# randomized stability checks
# ---------------------------------------------------------------------------


def random_oplm(
    s: StateSet, rng: np.random.Generator, budget: SearchBudget = SearchBudget()
) -> LocalMeasurement | None:
    """Random nontrivial projective OPLM: a random orthogonalizing rank-1 basis, randomly coarse-grained."""
    parties = list(s.sig.party_labels)
    rng.shuffle(parties)
    for p in parties:
        T = party_matrices(s, p)
        U, _ = orthogonalizing_basis(T, rng, budget)
        if U is None:
            continue
        d = U.shape[0]
        g = int(rng.integers(2, d + 1))
        order = rng.permutation(d)
        cuts = np.sort(rng.choice(np.arange(1, d), size=g - 1, replace=False))
        groups = np.split(order, cuts)
        ops = [U[:, grp] @ U[:, grp].conj().T for grp in groups]
        labels = ["Q_" + "".join(str(int(i)) for i in sorted(grp)) for grp in groups]
        return LocalMeasurement(p, tuple(ops), tuple(labels))
    return None


def _random_pair(rng):
    dims = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
    N = dims[0] * dims[1]
    a = random_ket(N, rng)
    b = random_ket(N, rng)
    b = b - np.vdot(a, b) * a
    b /= np.linalg.norm(b)
    return StateSet.from_vectors(DimensionSignature.of(*dims), [a, b])


def _random_distinguishable_2x2(rng, kind):
    UA = random_unitary(2, rng)
    UB = random_unitary(2, rng)
    UC = random_unitary(2, rng)
    a, ap = UA[:, 0], UA[:, 1]
    b, bp = UB[:, 0], UB[:, 1]
    c, cp = UC[:, 0], UC[:, 1]
    if kind == "product4":
        vecs = [np.kron(a, b), np.kron(a, bp), np.kron(ap, c), np.kron(ap, cp)]
    elif kind == "product3":
        vecs = [np.kron(a, b), np.kron(a, bp), np.kron(ap, c), np.kron(ap, cp)]
        drop = int(rng.integers(4))
        vecs = [v for i, v in enumerate(vecs) if i != drop]
    else:
        p1, p2 = np.kron(a, b), np.kron(ap, c)
        basis = np.column_stack([p1, p2])
        Q, _ = np.linalg.qr(np.column_stack([basis, np.eye(4, dtype=complex)]))
        comp = Q[:, 2:4]
        third = comp @ random_ket(2, rng)
        vecs = [p1, p2, third]
    if rng.random() < 0.5:
        vecs = [v.reshape(2, 2).T.ravel() for v in vecs]
    order = rng.permutation(len(vecs))
    return StateSet.from_vectors(DimensionSignature.of(2, 2), [vecs[i] for i in order])


class StabilitySummary(NamedTuple):
    pair_trials: int
    pair_counterexamples: tuple[dict, ...]
    set_trials: int
    set_counterexamples: tuple[dict, ...]
    branches_checked: int

    @property
    def passed(self) -> bool:
        return not self.pair_counterexamples and not self.set_counterexamples


def _check_branches(s, m, budget, seed, tol):
    bad = []
    count = 0
    for k in range(m.num_outcomes):
        try:
            br = apply_outcome(s, m, k)
        except EmptyBranchError:
            continue
        count += 1
        v = classify(br.transformed_set, budget, seed, tol)
        if v.status is not Status.DISTINGUISHABLE:
            bad.append({"outcome": m.outcome_labels[k], "status": v.status.value, "rules": list(v.rule_names)})
    return bad, count


def proposition_tests(
    seed: int = 0, n_trials: int = 200, budget: SearchBudget | None = None, tol: float = DEFAULT_TOL
) -> StabilitySummary:
    """Check that nontrivial OPLMs never destroy local distinguishability on random instances.

    Part 1 uses orthogonal pairs with local dimensions 2 or 3; part 2 uses
    locally distinguishable sets of 3 or 4 states in C2 (x) C2. Any branch
    not classified Distinguishable is recorded as a counterexample.
    """
    budget = budget or SearchBudget()
    rng = np.random.default_rng(seed)
    c1, c2 = [], []
    checked = 0
    for t in range(n_trials):
        s = _random_pair(rng)
        m = random_oplm(s, rng, budget)
        if m is None or not is_oplm(s, m, 1e-7).oplm:
            c1.append({"trial": t, "error": "no OPLM generated"})
            continue
        bad, cnt = _check_branches(s, m, budget, seed + t, tol)
        checked += cnt
        if bad:
            c1.append({"trial": t, "dims": list(s.sig.dims), "branches": bad})
    kinds = ("product4", "product3", "two-product")
    for t in range(n_trials):
        if t == 0:
            k = lambda a, b: basis_ket((a, b), (2, 2))  # noqa: E731
            r2 = np.sqrt(0.5)
            s = StateSet.from_vectors(
                DimensionSignature.of(2, 2),
                [k(0, 0), k(0, 1), r2 * (k(1, 0) + k(1, 1)), r2 * (k(1, 0) - k(1, 1))],
            )
            kind = "product4"
        else:
            kind = kinds[t % 3]
            s = _random_distinguishable_2x2(rng, kind)
        m = random_oplm(s, rng, budget)
        if m is None or not is_oplm(s, m, 1e-7).oplm:
            c2.append({"trial": t, "kind": kind, "error": "no OPLM generated"})
            continue
        bad, cnt = _check_branches(s, m, budget, seed + t, tol)
        checked += cnt
        if bad:
            c2.append({"trial": t, "kind": kind, "branches": bad})
    return StabilitySummary(n_trials, tuple(c1), n_trials, tuple(c2), checked)
