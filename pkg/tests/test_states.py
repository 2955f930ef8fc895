import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loccact import catalog
from loccact.errors import DegenerateInputError, SignatureError
from loccact.states import (
    FactorizationSpec,
    MultipartiteState,
    StateSet,
    coarse_grain,
    equivalent_up_to_scale,
    has_local_redundancy,
    is_orthogonal_set,
    is_product_across,
    local_supports,
)
from loccact.tensor_core import DimensionSignature, random_ket, random_unitary

from conftest import kets, make_set


def test_zero_state_rejected():
    with pytest.raises(DegenerateInputError):
        MultipartiteState(DimensionSignature.of(2, 2), np.zeros(4))


def test_amplitudes_read_only():
    s = catalog.get("example1").state_set
    with pytest.raises(ValueError):
        s[0].amplitudes[0] = 5


def test_mixed_signatures_rejected():
    a = MultipartiteState(DimensionSignature.of(2, 2), np.ones(4))
    b = MultipartiteState(DimensionSignature.of(4), np.ones(4))
    with pytest.raises(SignatureError):
        StateSet(a.sig, (a, b))


def test_orthogonality_witness():
    k = kets(2, 2)
    s = make_set((2, 2), [k(0, 0), k(0, 0) + k(1, 1), k(1, 0)], ["a", "b", "c"])
    rep = is_orthogonal_set(s)
    assert not rep
    i, j, ov = rep.witness
    assert (i, j) == (0, 1) and ov == 1
    assert np.isclose(rep.max_overlap, 1 / np.sqrt(2))


def test_orthogonality_is_scale_free():
    k = kets(2, 2)
    s = make_set((2, 2), [1e6 * k(0, 0), 1e-6 * (k(0, 1) + 1e-3 * k(0, 0))])
    assert is_orthogonal_set(s, tol=1e-2)
    assert not is_orthogonal_set(s, tol=1e-4)


def test_product_across():
    k = kets(2, 2, 2)
    sig = DimensionSignature.of(2, 2, 2)
    ghz = MultipartiteState(sig, k(0, 0, 0) + k(1, 1, 1))
    bc_bell = MultipartiteState(sig, k(0, 0, 0) + k(0, 1, 1))
    assert not is_product_across(ghz, ["A"])
    assert is_product_across(bc_bell, ["A"])
    assert not is_product_across(bc_bell, ["B"])


def _trace_overlap_oracle(u, v, dims, keep):
    """tr(rho_u rho_v) through explicit einsum contractions."""
    n = len(dims)
    letters = "abcdefgh"[:n]
    primed = "ABCDEFGH"[:n]
    tu, tv = u.reshape(dims), v.reshape(dims)
    ru_in = "".join(letters[i] if i in keep else letters[i] for i in range(n))
    ru_out = "".join(primed[i] if i in keep else letters[i] for i in range(n))
    rho_u = np.einsum(f"{ru_in},{ru_out}->" + "".join(letters[i] for i in keep) + "".join(primed[i] for i in keep), tu, tu.conj())
    rho_v = np.einsum(f"{ru_in},{ru_out}->" + "".join(letters[i] for i in keep) + "".join(primed[i] for i in keep), tv, tv.conj())
    a = "".join(letters[i] for i in keep)
    b = "".join(primed[i] for i in keep)
    return np.einsum(f"{a}{b},{b}{a}->", rho_u, rho_v)


def test_intro_redundancy_witnesses_match_oracle():
    e = catalog.get("intro-redundant")
    rep = has_local_redundancy(e.state_set, e.factorization)
    assert rep.redundant
    found = {frozenset(w.discard) for w in rep.witnesses}
    assert frozenset({"A'", "B'"}) in found and frozenset({"A", "B"}) in found
    # refined factor order is (A, A', B, B')
    vecs = [st.normalized() for st in e.state_set.states]
    dims = (2, 2, 2, 2)
    for keep in ([0, 2], [1, 3]):
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(_trace_overlap_oracle(vecs[i], vecs[j], dims, keep)) < 1e-12
    assert rep.checked == 14


def test_example1_not_redundant_with_oracle():
    e = catalog.get("example1")
    rep = has_local_redundancy(e.state_set, e.factorization)
    assert not rep.redundant and rep.checked == 6
    vecs = [st.normalized() for st in e.state_set.states]
    for keep in ([0], [1], [2], [0, 1], [0, 2], [1, 2]):
        worst = max(abs(_trace_overlap_oracle(vecs[i], vecs[j], (2, 2, 2), keep)) for i, j in [(0, 1), (0, 2), (1, 2)])
        assert worst > 0.1


def test_whole_party_witness_kind():
    k = kets(2, 2, 2)
    s = make_set((2, 2, 2), [k(0, 0, 0), k(0, 1, 1)])
    kinds = {w.discard: w.kind for w in has_local_redundancy(s).witnesses}
    assert kinds[("A",)] == "whole-party"


def test_factorization_refine_errors():
    sig = DimensionSignature.of(2, 4)
    with pytest.raises(SignatureError):
        FactorizationSpec({"B": (3, 2)}).refine(sig)
    with pytest.raises(SignatureError):
        FactorizationSpec({"B": (2, 2)}, {"B": ("x",)}).refine(sig)
    assert FactorizationSpec({"B": (2, 2)}).refine(sig).factor_names == ("A", "B0", "B1")


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 12))
def test_equivalent_up_to_global_factor(seed, dim):
    rng = np.random.default_rng(seed)
    v = random_ket(dim, rng)
    c = rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    assert equivalent_up_to_scale(v, c * v)
    w = random_ket(dim, rng)
    w = w - np.vdot(v, w) * v
    assert not equivalent_up_to_scale(v, v + 0.1 * w / np.linalg.norm(w), tol=1e-6)


def test_coarse_grain_preserves_gram(rng):
    sig = DimensionSignature.of(2, 3, 2)
    U = random_unitary(12, rng)
    s = StateSet.from_vectors(sig, [U[:, i] for i in range(4)])
    g = coarse_grain(s, [["B"], ["A", "C"]])
    assert g.sig.parties == ("B", "AC") and g.sig.dims == (3, 4)
    assert np.allclose(g.gram(), s.gram(), atol=1e-12)
    with pytest.raises(SignatureError):
        coarse_grain(s, [["A"], ["B"]])


def test_local_supports():
    s = catalog.get("example3").state_set.subset([2])
    sup = local_supports(s)
    assert list(sup[0]) == [0, 2] and list(sup[1]) == [1, 3]
