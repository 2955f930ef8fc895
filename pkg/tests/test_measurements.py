import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loccact import catalog
from loccact.errors import CompletenessError, EmptyBranchError, PartitionError, SignatureError
from loccact.measurements import (
    LocalMeasurement,
    apply_local,
    apply_outcome,
    basis_measurement,
    identity_measurement,
    is_nontrivial,
    is_oplm,
    outcome_probabilities,
    projector_measurement,
)
from loccact.states import MultipartiteState
from loccact.tensor_core import DimensionSignature, random_ket, random_unitary


def test_projector_partition_errors():
    with pytest.raises(PartitionError):
        projector_measurement("A", [[0, 1], [1, 2]], 3)
    with pytest.raises(PartitionError):
        projector_measurement("A", [[0], [1]], 3)
    with pytest.raises(PartitionError):
        projector_measurement("A", [[0, 1, 2], []], 3)


def test_completeness_checked():
    with pytest.raises(CompletenessError):
        LocalMeasurement("A", (np.diag([1, 0]),), ("x",))
    root = np.sqrt(0.5) * np.eye(2)
    m = LocalMeasurement("A", (root, root), ("x", "y"))
    assert not is_nontrivial(m)


def test_labels_and_rest_outcome():
    m = projector_measurement("B", [[0, 1], [2, 3]], 4)
    assert m.outcome_labels == ("P_01", "P_23")
    b = basis_measurement("A", [np.array([1, 1, 0]), np.array([1, -1, 0])])
    assert b.outcome_labels == ("e0", "e1", "rest")
    assert np.allclose(b.operators[2], np.diag([0, 0, 1]))


def test_apply_local_matches_kron():
    rng = np.random.default_rng(3)
    sig = DimensionSignature.of(2, 3)
    psi = random_ket(6, rng)
    M = rng.normal(size=(3, 3))
    assert np.allclose(apply_local(psi, sig, "B", M), np.kron(np.eye(2), M) @ psi)


def test_apply_outcome_and_empty_branch():
    s = catalog.get("example3").state_set
    m = projector_measurement("A", [[0, 1], [2, 3, 4]], 5)
    br = apply_outcome(s, m, 0)
    assert br.survival_flags == (True, True, True)
    assert br.label == "P_01"
    assert br.transformed_set.name == "example3|A:P_01"
    assert np.isclose(sum(br.probabilities), 2 / 5 + 2 / 5 + 1 / 2)
    single = s.subset([2])
    only = projector_measurement("B", [[0], [1, 2, 3, 4]], 5)
    with pytest.raises(EmptyBranchError):
        apply_outcome(single, only, 0)


def test_dimension_mismatch():
    s = catalog.get("example1").state_set
    with pytest.raises(SignatureError):
        apply_outcome(s, projector_measurement("A", [[0], [1], [2]], 3), 0)
    with pytest.raises(SignatureError):
        apply_outcome(s, projector_measurement("C", [[0], [1]], 2), 0)


def test_oplm_examples():
    s = catalog.get("example1").state_set
    rep = is_oplm(s, projector_measurement("B", [[0, 1], [2, 3]], 4))
    assert rep.oplm and rep.nontrivial
    # Bob's computational basis maps psi1 and psi2 to the same |0 0> component
    assert not is_oplm(s, projector_measurement("B", [[0], [1], [2], [3]], 4))
    triv = is_oplm(s, identity_measurement("A", 2))
    assert triv.oplm and not triv.nontrivial


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(2, 4))
def test_probabilities_sum_to_one(seed, k):
    rng = np.random.default_rng(seed)
    sig = DimensionSignature.of(4, 2)
    psi = MultipartiteState(sig, 2 * random_ket(8, rng))
    U = random_unitary(4, rng)
    m = basis_measurement("A", [U[:, i] for i in range(k)])
    p = outcome_probabilities(psi, m)
    assert np.isclose(p.sum(), 1.0, atol=1e-12) and np.all(p >= -1e-15)
