import itertools

import numpy as np
import pytest

from loccact import catalog
from loccact._search import SearchBudget
from loccact.classify import (
    REGISTRY,
    Status,
    bipartitions,
    certify_indistinguishable,
    check_activation,
    classify,
    count_products,
    embed_2x2,
    match_monomial,
    match_registry,
    proposition_tests,
    protocol_search,
    replay_certificate,
    replay_monomial,
    solve_phases,
    product_rule,
)
from loccact.errors import PreconditionError
from loccact.measurements import apply_outcome, projector_measurement
from loccact.states import StateSet, is_product_across
from loccact.tensor_core import OMEGA, DimensionSignature, random_unitary

from conftest import kets, make_set

W = OMEGA


def _monomial_image(s: StateSet, rng) -> StateSet:
    """Random local permutation times phases on every party, plus a state shuffle."""
    dims = s.sig.party_dims
    ops = []
    for d in dims:
        P = np.eye(d)[rng.permutation(d)]
        ops.append(np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, d))) @ P)
    U = ops[0]
    for op in ops[1:]:
        U = np.kron(U, op)
    order = rng.permutation(len(s))
    sig = DimensionSignature(dims, s.sig.party_labels)
    vecs = [U @ s[i].party_tensor().ravel() for i in order]
    return StateSet.from_vectors(sig, vecs, [s.labels[i] for i in order])


def test_product_rule_both_directions(bell_triple, product_basis):
    assert product_rule(bell_triple) == (Status.INDISTINGUISHABLE, 0)
    assert product_rule(product_basis) == (Status.DISTINGUISHABLE, 4)
    k = kets(2, 2)
    two_product = make_set((2, 2), [k(0, 0), k(1, 1), k(0, 1) + k(1, 0)])
    assert product_rule(two_product) == (Status.DISTINGUISHABLE, 2)
    three_of_bell = make_set((2, 2), [k(0, 0) + k(1, 1), k(0, 0) - k(1, 1), k(0, 1) - k(1, 0), k(0, 1) + k(1, 0)])
    assert product_rule(three_of_bell) == (Status.INDISTINGUISHABLE, 0)
    with pytest.raises(PreconditionError):
        product_rule(product_basis.subset([0, 1]))


def test_count_products_matches_schmidt_route(bell_triple):
    for s in (bell_triple, catalog.canonical_2x2_branch_sets()[0][1]):
        assert count_products(s) == sum(is_product_across(st, ["A"]) for st in s.states)


def test_embed_examples():
    k = kets(4, 4)
    s = make_set((4, 4), [k(0, 0) + k(3, 1), k(0, 0) - k(3, 1), k(0, 1) - k(3, 0)])
    emb = embed_2x2(s)
    assert np.allclose(emb.alice, np.eye(4)[:, [0, 3]])
    assert np.allclose(emb.bob, np.eye(4)[:, [0, 1]])
    assert count_products(emb.states) == 0
    k2 = kets(2, 2)
    bell4 = make_set((2, 2), [k2(0, 0) + k2(1, 1), k2(0, 0) - k2(1, 1), k2(0, 1) + k2(1, 0), k2(0, 1) - k2(1, 0)])
    emb = embed_2x2(bell4)
    assert np.allclose(emb.alice, np.eye(2)) and np.allclose(emb.states.vectors, bell4.vectors)
    assert embed_2x2(catalog.get("example3").state_set) is None


def test_solve_phases_odd_cycle():
    # x0 + x1 = a, x1 + x2 = b, x0 + x2 = c has a unique solution modulo pi shifts
    angles = np.array([0.3, 1.1, -2.0])
    x = solve_phases([(0, 1), (1, 2), (0, 2)], angles, 3)
    assert x is not None
    for (i, j), a in zip([(0, 1), (1, 2), (0, 2)], angles):
        assert np.isclose(np.exp(1j * (x[i] + x[j])), np.exp(1j * a))
    # inconsistent: x0 + x1 = 0 twice with different angles
    assert solve_phases([(0, 1), (0, 1)], np.array([0.0, 1.0]), 2) is None


def test_registry_matches_relabeled_hssh():
    rng = np.random.default_rng(4)
    hssh = REGISTRY[0]
    img = _monomial_image(hssh.states, rng)
    m = match_monomial(img, hssh)
    assert m is not None and replay_monomial(img, m)
    assert match_registry(img).entry == hssh.key


def test_registry_rejects_non_monomial():
    # same HSSH set after a non-monomial local unitary
    rng = np.random.default_rng(2)
    hssh = REGISTRY[0].states
    U = random_unitary(5, rng)
    vecs = [np.kron(U, np.eye(5)) @ st.amplitudes for st in hssh.states]
    assert match_registry(StateSet.from_vectors(hssh.sig, vecs)) is None


def test_bipartitions():
    cuts = bipartitions(["A", "B", "C"])
    assert len(cuts) == 3
    assert {frozenset([frozenset(l), frozenset(r)]) for l, r in cuts} == {
        frozenset([frozenset("A"), frozenset("BC")]),
        frozenset([frozenset("B"), frozenset("AC")]),
        frozenset([frozenset("C"), frozenset("AB")]),
    }


def test_classify_basic(bell_triple, product_basis):
    v = classify(bell_triple)
    assert v.status is Status.INDISTINGUISHABLE and v.rule_names == ("R3",)
    v = classify(product_basis)
    assert v.status is Status.DISTINGUISHABLE and replay_certificate(product_basis, v)
    single = product_basis.subset([2])
    assert classify(single).rule_names == ("R1",)
    pair = product_basis.subset([0, 3])
    v = classify(pair)
    assert v.rule_names == ("R2",) and replay_certificate(pair, v)


def test_classify_requires_orthogonality():
    k = kets(2, 2)
    with pytest.raises(PreconditionError):
        classify(make_set((2, 2), [k(0, 0), k(0, 0) + k(1, 1)]))


@pytest.mark.parametrize("eid", ["example1", "example2", "example3", "example4", "intro-redundant"])
def test_catalog_sets_are_distinguishable(eid):
    s = catalog.get(eid).state_set
    v = classify(s)
    assert v.status is Status.DISTINGUISHABLE
    assert replay_certificate(s, v)


def test_branch_rule_chains():
    e3 = catalog.get("example3")
    br = apply_outcome(e3.state_set, e3.activating, 1).transformed_set
    v = classify(br)
    assert v.rule_names == ("R7",) and replay_certificate(br, v)
    e2 = catalog.get("example2")
    br = apply_outcome(e2.state_set, e2.activating, 0).transformed_set
    v = classify(br)
    assert v.rule_names == ("R4", "R5", "R3") and replay_certificate(br, v)
    e4 = catalog.get("example4")
    br = apply_outcome(e4.state_set, e4.activating, 1).transformed_set
    v = classify(br)
    assert v.rule_names == ("R6", "R7") and replay_certificate(br, v)


def test_tampered_certificate_fails_replay(bell_triple):
    v = classify(bell_triple)
    step = v.rules[0]
    forged = type(v)(v.status, (type(step)(step.rule, step.detail, {"n_states": 3, "product_count": 2}),))
    assert not replay_certificate(bell_triple, forged)


def test_invariance_under_relabeling_and_order():
    rng = np.random.default_rng(9)
    e1 = catalog.get("example1")
    sets = [
        catalog.canonical_2x2_branch_sets()[0][1],
        apply_outcome(catalog.get("example3").state_set, catalog.get("example3").activating, 1).transformed_set,
        e1.state_set,
    ]
    for s in sets:
        base = classify(s, SearchBudget(restarts=16)).status
        for _ in range(3):
            assert classify(_monomial_image(s, rng), SearchBudget(restarts=16)).status is base
        for perm in itertools.permutations(range(len(s))):
            assert classify(s.subset(perm), SearchBudget(restarts=16)).status is base


def test_search_never_succeeds_on_bell_triple(bell_triple):
    for restarts, seed in [(1, 0), (8, 1), (64, 2)]:
        assert protocol_search(bell_triple, SearchBudget(restarts=restarts), seed) is None


def test_generic_qutrit_triple_is_unknown():
    rng = np.random.default_rng(5)
    U = random_unitary(9, rng)
    s = StateSet.from_vectors(DimensionSignature.of(3, 3), [U[:, i] for i in range(3)])
    v = classify(s, SearchBudget(restarts=8))
    assert v.status is Status.UNKNOWN
    assert v.evidence["budget"]["restarts"] == 8


def test_check_activation_examples():
    e1 = catalog.get("example1")
    rep = check_activation(e1.state_set, e1.activating)
    assert rep.activating and rep.cardinality_preserved
    assert all(v.status is Status.INDISTINGUISHABLE for v in rep.per_branch)
    alice = projector_measurement("A", [[0], [1]], 2)
    assert not check_activation(e1.state_set, alice).activating
    with pytest.raises(PreconditionError):
        check_activation(e1.state_set, projector_measurement("B", [[0], [1], [2], [3]], 4))


def test_certify_needs_three_states(bell_triple):
    assert certify_indistinguishable(bell_triple.subset([0, 1])) is None


def test_proposition_suite_small():
    summary = proposition_tests(seed=3, n_trials=15)
    assert summary.passed
    assert summary.pair_trials == summary.set_trials == 15
    assert summary.branches_checked > 30
