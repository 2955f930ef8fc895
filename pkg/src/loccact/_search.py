"""Numerical search for orthogonalizing local bases.

Given states ``T[i]`` written as ``(d, rest)`` matrices with the measuring
party's axis first, find a unitary ``U`` whose columns ``|a>`` make the
conditional states ``<a|psi_i>`` pairwise orthogonal for every ``a``. The
objective is ``sum_a sum_{i<j} |<eta_i(a)|eta_j(a)>|^2`` for normalized
inputs.

The columns of an unconstrained complex matrix ``V`` are optimized by
Levenberg-Marquardt on the overlap residuals plus ``V^dag V - I``; the
polar factor of the result is then scored exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar

from . import _kernels

SUCCESS_THRESHOLD = 1e-14


@dataclass(frozen=True)
class SearchBudget:
    """Multi-start budget: ``restarts`` LM runs of at most ``iterations`` steps each."""

    restarts: int = 64
    iterations: int = 500
    threshold: float = SUCCESS_THRESHOLD

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 1:
            raise ValueError("budget must be >= 1")

    def to_dict(self):
        return {"restarts": self.restarts, "iterations": self.iterations, "threshold": self.threshold}


def objective(T: np.ndarray, U: np.ndarray) -> float:
    B = _kernels.pair_forms(T)
    if B.shape[0] == 0:
        return 0.0
    G = np.einsum("xa,pxy,ya->ap", U, B, U.conj())
    return float(np.sum(np.abs(G) ** 2))


def _levenberg_marquardt(z, B, d, maxiter):
    residuals = _kernels.overlap_residuals
    r, J = residuals(z, B, d)
    cost = r @ r
    lam = 1e-3
    eye = np.eye(z.size)
    for _ in range(maxiter):
        if cost < 1e-28:
            break
        g = J.T @ r
        step = np.linalg.solve(J.T @ J + lam * eye, g)
        zn = z - step
        rn, Jn = residuals(zn, B, d)
        cn = rn @ rn
        if cn < cost:
            z, r, J, cost = zn, rn, Jn, cn
            lam = max(lam * 0.1, 1e-15)
        else:
            lam *= 10.0
            if lam > 1e10:
                break
    return z


def orthogonalizing_basis(T, rng: np.random.Generator, budget: SearchBudget = SearchBudget(), restarts=None):
    """Return ``(U, objective)``; ``U`` is None if no restart met the threshold.

    On failure the objective is the best value seen.
    """
    T = np.ascontiguousarray(T, dtype=np.complex128)
    n, d = T.shape[:2]
    if n < 2:
        return np.eye(d, dtype=complex), 0.0
    norms = np.linalg.norm(T.reshape(n, -1), axis=1)
    T = T / norms[:, None, None]
    B = _kernels.pair_forms(T)
    best = np.inf
    for _ in range(budget.restarts if restarts is None else restarts):
        Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        Q, _ = np.linalg.qr(Z)
        z0 = np.concatenate([Q.real.ravel(), Q.imag.ravel()])
        z = _levenberg_marquardt(z0, B, d, budget.iterations)
        V = (z[: d * d] + 1j * z[d * d :]).reshape(d, d)
        if not np.all(np.isfinite(V)):
            continue
        U, _ = polar(V)
        G = np.einsum("xa,pxy,ya->ap", U, B, U.conj())
        obj = float(np.sum(np.abs(G) ** 2))
        best = min(best, obj)
        if obj < budget.threshold:
            return U, obj
    return None, best
