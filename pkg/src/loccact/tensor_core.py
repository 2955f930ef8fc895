"""Dense complex linear algebra on small tensor-product spaces.

States are plain 1-D complex numpy arrays whose flattening follows the
row-major order of the factor dimensions in a :class:`DimensionSignature`.
Operators are 2-D complex arrays.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, DimensionLimitError, SignatureError

DEFAULT_TOL = 1e-9
RANK_RTOL = 1e-8
DIM_CAP = 2**16

OMEGA = np.exp(2j * np.pi / 3)


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite complex array of rank 1 or 2."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim not in (1, 2):
        raise SignatureError(f"expected a vector or matrix, got shape {arr.shape}")
    if arr.size == 0:
        raise SignatureError("empty matrix")
    if not np.all(np.isfinite(arr)):
        raise SignatureError("matrix has non-finite entries")
    return arr


@dataclass(frozen=True)
class DimensionSignature:
    """Local dimensions of the tensor factors and the party owning each.

    ``names`` optionally labels individual factors (e.g. ``A'``); by default
    a factor is named after its party, with a numeric suffix when a party
    owns more than one factor.
    """

    dims: tuple[int, ...]
    parties: tuple[str, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "parties", tuple(str(p) for p in self.parties))
        if not dims:
            raise SignatureError("signature needs at least one factor")
        if any(d < 2 for d in dims):
            raise SignatureError(f"local dimensions must be >= 2, got {dims}")
        if len(self.parties) != len(dims):
            raise SignatureError("one party label is required per factor")
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != len(dims) or len(set(names)) != len(names):
                raise SignatureError("factor names must be unique, one per factor")
            object.__setattr__(self, "names", names)

    @classmethod
    def of(cls, *dims: int, parties: Sequence[str] | None = None) -> "DimensionSignature":
        """One party per factor, labelled A, B, C, ... unless given."""
        if parties is None:
            parties = string.ascii_uppercase[: len(dims)]
        return cls(tuple(dims), tuple(parties))

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def party_labels(self) -> tuple[str, ...]:
        seen = []
        for p in self.parties:
            if p not in seen:
                seen.append(p)
        return tuple(seen)

    @property
    def factor_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        out = []
        for i, p in enumerate(self.parties):
            owned = self.factors_of(p)
            out.append(p if len(owned) == 1 else f"{p}{owned.index(i)}")
        return tuple(out)

    def factors_of(self, party: str) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.parties) if p == party)

    def party_dim(self, party: str) -> int:
        idx = self.factors_of(party)
        if not idx:
            raise SignatureError(f"unknown party {party!r}")
        return int(np.prod([self.dims[i] for i in idx]))

    @property
    def party_dims(self) -> tuple[int, ...]:
        return tuple(self.party_dim(p) for p in self.party_labels)

    def party_level(self) -> "DimensionSignature":
        """Signature with one factor per party (factors of a party merged)."""
        return DimensionSignature(self.party_dims, self.party_labels)

    def to_dict(self) -> dict:
        d = {"dims": list(self.dims), "parties": list(self.parties)}
        if self.names is not None:
            d["names"] = list(self.names)
        return d


def _check_state(psi, sig: DimensionSignature) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != sig.total:
        raise SignatureError(f"state of length {psi.size} does not match dims {sig.dims}")
    return psi


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def basis_ket(indices: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Computational basis ket |i1 i2 ...> for the given factor dimensions."""
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[np.ravel_multi_index(tuple(indices), tuple(dims))] = 1.0
    return v


def tensor_product(a, b, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product of two vectors or matrices.

    Raises
    ------
    DimensionLimitError
        If the product of row or column counts exceeds ``cap``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.ndim != b.ndim:
        raise SignatureError("cannot mix vectors and matrices in a tensor product")
    if a.ndim == 1:
        if a.size * b.size > cap:
            raise DimensionLimitError(f"dimension {a.size * b.size} exceeds cap {cap}")
    elif a.shape[0] * b.shape[0] > cap or a.shape[1] * b.shape[1] > cap:
        raise DimensionLimitError(f"dimension exceeds cap {cap}")
    return np.kron(a, b)


def party_tensor(psi, sig: DimensionSignature) -> np.ndarray:
    """Reshape a state to one axis per party, in ``sig.party_labels`` order."""
    psi = _check_state(psi, sig)
    order = [i for p in sig.party_labels for i in sig.factors_of(p)]
    t = psi.reshape(sig.dims).transpose(order)
    return t.reshape(sig.party_dims)


def from_party_tensor(t, sig: DimensionSignature) -> np.ndarray:
    order = [i for p in sig.party_labels for i in sig.factors_of(p)]
    t = np.asarray(t).reshape([sig.dims[i] for i in order])
    return t.transpose(np.argsort(order)).reshape(-1)


def bipartite_matrix(psi, sig: DimensionSignature, left: Iterable[int]) -> np.ndarray:
    """Amplitude matrix with the ``left`` factors as rows and the rest as columns."""
    psi = _check_state(psi, sig)
    left = sorted(set(left))
    n = len(sig.dims)
    if not left or len(left) >= n or any(not 0 <= i < n for i in left):
        raise SignatureError(f"cut {left} is not a proper bipartition of {n} factors")
    right = [i for i in range(n) if i not in left]
    t = psi.reshape(sig.dims).transpose(left + right)
    rows = int(np.prod([sig.dims[i] for i in left]))
    return t.reshape(rows, -1)


def partial_trace(rho, sig: DimensionSignature, keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not in ``keep``; kept factors retain their order."""
    rho = as_matrix(rho)
    N = sig.total
    if rho.shape != (N, N):
        raise SignatureError(f"density matrix shape {rho.shape} does not match dims {sig.dims}")
    keep = sorted(set(keep))
    n = len(sig.dims)
    if not keep or len(keep) >= n or any(not 0 <= i < n for i in keep):
        raise SignatureError(f"keep={keep} must be a nonempty proper subset of {n} factors")
    drop = [i for i in range(n) if i not in keep]
    perm = keep + drop
    K = int(np.prod([sig.dims[i] for i in keep]))
    D = N // K
    t = rho.reshape(sig.dims + sig.dims)
    t = t.transpose(perm + [n + i for i in perm]).reshape(K, D, K, D)
    return _kernels.trace_out(np.ascontiguousarray(t, dtype=np.complex128))


def reduced_state(psi, sig: DimensionSignature, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of a pure state, computed as ``M M^dag``."""
    M = bipartite_matrix(psi, sig, keep)
    return M @ M.conj().T


class SchmidtDecomposition(NamedTuple):
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray


def schmidt_decompose(psi, sig: DimensionSignature, cut: Iterable[int]) -> SchmidtDecomposition:
    """Schmidt form ``psi = sum_k c_k |left_k>|right_k>`` across ``cut | rest``.

    Coefficients are nonincreasing and their squares sum to <psi|psi>.
    ``left`` and ``right`` hold the Schmidt vectors as columns.
    """
    psi = _check_state(psi, sig)
    if not np.any(np.abs(psi) > 0):
        raise DegenerateInputError("cannot Schmidt-decompose the zero vector")
    M = bipartite_matrix(psi, sig, cut)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    return SchmidtDecomposition(s, U, Vh.T)


def schmidt_rank(psi, sig: DimensionSignature, cut: Iterable[int], rtol: float = RANK_RTOL) -> int:
    c = schmidt_decompose(psi, sig, cut).coefficients
    return int(np.sum(c > rtol * c[0]))


def gram_matrix(states: Sequence) -> np.ndarray:
    """Matrix of inner products ``G[i, j] = <psi_i|psi_j>``."""
    vecs = [np.asarray(s, dtype=complex).ravel() for s in states]
    if not vecs:
        raise SignatureError("need at least one state")
    if len({v.size for v in vecs}) != 1:
        raise SignatureError("states have different dimensions")
    return _kernels.gram(np.ascontiguousarray(np.stack(vecs), dtype=np.complex128))


def matrix_rank(M, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    Z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def complete_basis(vectors: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Orthonormal basis (as columns) whose leading columns are the normalized inputs.

    The inputs should be pairwise orthogonal; they are Gram-Schmidt cleaned
    in order to absorb rounding. Extra columns are a deterministic completion
    built from the computational basis.
    """
    cols = []
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        for c in cols:
            v = v - np.vdot(c, v) * c
        cols.append(v / np.linalg.norm(v))
    for i in range(dim):
        if len(cols) == dim:
            break
        e = ket(i, dim)
        for _ in range(2):
            for c in cols:
                e = e - np.vdot(c, e) * c
        n = np.linalg.norm(e)
        if n > 1e-6:
            cols.append(e / n)
    if len(cols) != dim:
        raise DegenerateInputError("could not complete an orthonormal basis")
    return np.column_stack(cols)
