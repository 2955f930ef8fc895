import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loccact import catalog
from loccact._search import SearchBudget, objective, orthogonalizing_basis
from loccact.errors import PreconditionError
from loccact.measurements import projector_measurement
from loccact.protocols import (
    Leaf,
    Node,
    build_one_way,
    depth,
    iter_nodes,
    party_matrices,
    simulate,
    verify_oplm_tree,
    walgate_two_state,
)
from loccact.states import MultipartiteState, StateSet
from loccact.tensor_core import DimensionSignature, random_unitary

from conftest import kets


def _random_pair(rng, da, db):
    U = random_unitary(da * db, rng)
    sig = DimensionSignature.of(da, db)
    return MultipartiteState(sig, U[:, 0], "x"), MultipartiteState(sig, U[:, 1], "y")


def test_node_child_count():
    m = projector_measurement("A", [[0], [1]], 2)
    with pytest.raises(ValueError):
        Node(m, (Leaf("a"),))


def test_simulate_product_basis(product_basis):
    s = product_basis
    ma = projector_measurement("A", [[0], [1]], 2)
    mb = projector_measurement("B", [[0], [1]], 2)
    tree = Node(ma, (Node(mb, (Leaf("psi1"), Leaf("psi2"))), Node(mb, (Leaf("psi3"), Leaf("psi4")))))
    rep = simulate(tree, s)
    assert rep.perfect and rep.max_error < 1e-15
    dist = rep.per_state[2].leaf_distribution
    assert list(dist) == ["A:P_1/B:P_0"] and np.isclose(dist["A:P_1/B:P_0"], 1.0)
    assert depth(tree) == 2 and len(list(iter_nodes(tree))) == 3


def test_simulate_reports_conflicts(bell_triple):
    tree = Node(projector_measurement("A", [[0], [1]], 2), (Leaf("psi1"), Leaf("psi3")))
    rep = simulate(tree, bell_triple)
    assert not rep.perfect
    paths = dict(rep.conflicts)
    assert set(paths["A:P_0"]) == {"psi1", "psi2", "psi3"}
    assert np.isclose(rep.per_state[0].success_probability, 0.5)


def test_non_oplm_tree_detected():
    s = catalog.get("example1").state_set
    bad = Node(projector_measurement("B", [[0], [1], [2], [3]], 4), tuple(Leaf() for _ in range(4)))
    assert not verify_oplm_tree(bad, s)


@pytest.mark.parametrize("eid", ["example1", "example2", "example3", "example4", "intro-redundant"])
def test_scripted_trees(eid):
    e = catalog.get(eid)
    rep = simulate(e.protocols["distinguishing"], e.state_set)
    assert rep.perfect
    assert all(abs(r.success_probability - 1) < 1e-9 for r in rep.per_state)
    assert verify_oplm_tree(e.protocols["distinguishing"], e.state_set)


@pytest.mark.parametrize("dims", [(2, 2), (3, 3), (2, 3)])
def test_walgate_random_pairs(dims):
    rng = np.random.default_rng(sum(dims))
    for _ in range(10):
        a, b = _random_pair(rng, *dims)
        res = walgate_two_state(a, b, seed=1)
        assert res.objective < 1e-14
        s = StateSet(a.sig, (a, b))
        assert simulate(res.subtree, s).perfect


def test_walgate_basis_orthogonalizes():
    # independent check: conditional states <a|psi_i> are orthogonal for each basis vector
    rng = np.random.default_rng(7)
    a, b = _random_pair(rng, 3, 3)
    res = walgate_two_state(a, b, first_party="B")
    T = party_matrices(StateSet(a.sig, (a, b)), "B")
    for u in res.basis:
        ca, cb = u.conj() @ T[0], u.conj() @ T[1]
        assert abs(np.vdot(ca, cb)) < 1e-7


def test_walgate_preconditions():
    k = kets(2, 2)
    sig = DimensionSignature.of(2, 2)
    with pytest.raises(PreconditionError):
        walgate_two_state(MultipartiteState(sig, k(0, 0)), MultipartiteState(sig, k(0, 0) + k(0, 1)))


def test_walgate_tripartite():
    k = kets(2, 2, 2)
    sig = DimensionSignature.of(2, 2, 2)
    ghz_p = MultipartiteState(sig, k(0, 0, 0) + k(1, 1, 1), "p")
    ghz_m = MultipartiteState(sig, k(0, 0, 0) - k(1, 1, 1), "m")
    res = walgate_two_state(ghz_p, ghz_m)
    assert simulate(res.subtree, StateSet(sig, (ghz_p, ghz_m))).perfect


def test_objective_zero_for_solution():
    s = catalog.get("example3").state_set
    T = party_matrices(s, "A")
    U, obj = orthogonalizing_basis(T, np.random.default_rng(0))
    assert U is not None and obj < 1e-14
    assert np.isclose(objective(T / np.linalg.norm(T.reshape(3, -1), axis=1)[:, None, None], U), obj, atol=1e-15)


def test_one_way_search_fails_on_bell_triple(bell_triple):
    for seed in range(3):
        assert build_one_way(bell_triple, SearchBudget(restarts=16), np.random.default_rng(seed)) is None


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_leaf_mass_is_conserved(seed):
    rng = np.random.default_rng(seed)
    a, b = _random_pair(rng, 2, 3)
    res = walgate_two_state(a, b, seed=seed % 100)
    rep = simulate(res.subtree, StateSet(a.sig, (a, b)))
    for r in rep.per_state:
        assert np.isclose(sum(r.leaf_distribution.values()), 1.0, atol=1e-10)
