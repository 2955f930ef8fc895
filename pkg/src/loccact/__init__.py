"""Local discrimination of orthogonal multipartite pure states and nonlocality activation."""

from ._search import SearchBudget
from .classify import (
    ActivationReport,
    RuleStep,
    Status,
    Verdict,
    certify_indistinguishable,
    check_activation,
    classify,
    embed_2x2,
    proposition_tests,
    replay_certificate,
    product_rule,
)
from .measurements import (
    LocalMeasurement,
    apply_outcome,
    basis_measurement,
    identity_measurement,
    is_oplm,
    projector_measurement,
)
from .protocols import Leaf, Node, build_one_way, simulate, verify_oplm_tree, walgate_two_state
from .states import (
    FactorizationSpec,
    MultipartiteState,
    StateSet,
    coarse_grain,
    equivalent_up_to_scale,
    has_local_redundancy,
    is_orthogonal_set,
    is_product_across,
)
from .tensor_core import (
    OMEGA,
    DimensionSignature,
    basis_ket,
    gram_matrix,
    partial_trace,
    reduced_state,
    schmidt_decompose,
    schmidt_rank,
    tensor_product,
)

__version__ = "0.1.0"
