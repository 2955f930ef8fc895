"""Hot numeric kernels.

Each kernel has a numba ``@njit`` implementation and a pure-numpy
implementation with identical signatures. The public names bound at the
bottom of this module point at the numba versions unless numba is missing
or ``LOCCACT_DISABLE_NUMBA`` is set to a truthy value.
"""

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _env_disabled():
    return os.environ.get("LOCCACT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = _HAVE_NUMBA and not _env_disabled()


# ---------------------------------------------------------------------------
# conditional-overlap residuals
#
# Columns v_a of a (not necessarily unitary) d x d matrix V are candidate
# measurement vectors on one party. For every unordered pair p = (i, j) of
# states, B[p] is the d x d form with G[a, p] = v_a^T B[p] conj(v_a) equal to
# the overlap <eta_i(a)|eta_j(a)> of the conditional states. The residual
# vector stacks Re/Im of all G followed by Re/Im of the upper triangle of
# V^dag V - I. Parameters z are [Re V.ravel(), Im V.ravel()].
# ---------------------------------------------------------------------------


def pair_forms(T):
    """Sesquilinear forms ``B[p, x, y] = sum_r conj(T[i, x, r]) T[j, y, r]`` for pairs i < j."""
    n = T.shape[0]
    iu = np.triu_indices(n, 1)
    return np.ascontiguousarray(np.einsum("pxr,pyr->pxy", T[iu[0]].conj(), T[iu[1]]))


def _overlap_residuals_np(z, B, d):
    dd = d * d
    P = B.shape[0]
    V = (z[:dd] + 1j * z[dd:]).reshape(d, d)
    m1 = d * P
    iu = np.triu_indices(d)
    k = len(iu[0])
    rows = 2 * m1 + 2 * k
    r = np.zeros(rows)
    J = np.zeros((rows, 2 * dd))

    G = np.einsum("xa,pxy,ya->ap", V, B, V.conj()).ravel()
    r[:m1] = G.real
    r[m1 : 2 * m1] = G.imag
    Bv = np.einsum("pxy,ya->apx", B, V.conj())
    BTv = np.einsum("pxy,xa->apy", B, V)
    gp = Bv + BTv
    gq = 1j * (Bv - BTv)
    # row (a, p) only touches columns x*d + a
    Jp = np.zeros((d, P, d, d), dtype=complex)
    Jq = np.zeros((d, P, d, d), dtype=complex)
    for a in range(d):
        Jp[a, :, :, a] = gp[a]
        Jq[a, :, :, a] = gq[a]
    Jp = Jp.reshape(m1, dd)
    Jq = Jq.reshape(m1, dd)
    J[:m1, :dd] = Jp.real
    J[:m1, dd:] = Jq.real
    J[m1 : 2 * m1, :dd] = Jp.imag
    J[m1 : 2 * m1, dd:] = Jq.imag

    o = 2 * m1
    S = V.conj().T @ V - np.eye(d)
    r[o : o + k] = S[iu].real
    r[o + k : o + 2 * k] = S[iu].imag
    xs = np.arange(d)
    for t, (a, b) in enumerate(zip(*iu)):
        # S_ab = sum_x conj(V[x, a]) V[x, b]
        ca = xs * d + a
        cb = xs * d + b
        for cols, gpx, gqx in (
            (ca, V[:, b], -1j * V[:, b]),
            (cb, V[:, a].conj(), 1j * V[:, a].conj()),
        ):
            J[o + t, cols] += gpx.real
            J[o + t, dd + cols] += gqx.real
            J[o + k + t, cols] += gpx.imag
            J[o + k + t, dd + cols] += gqx.imag
    return r, J


@njit(cache=True)
def _overlap_residuals_nb(z, B, d):
    dd = d * d
    P = B.shape[0]
    V = np.empty((d, d), dtype=np.complex128)
    for x in range(d):
        for a in range(d):
            V[x, a] = z[x * d + a] + 1j * z[dd + x * d + a]
    m1 = d * P
    k = d * (d + 1) // 2
    rows = 2 * m1 + 2 * k
    r = np.zeros(rows)
    J = np.zeros((rows, 2 * dd))
    for a in range(d):
        for p in range(P):
            row = a * P + p
            g = 0j
            for x in range(d):
                bv = 0j
                btv = 0j
                for y in range(d):
                    bv += B[p, x, y] * np.conj(V[y, a])
                    btv += B[p, y, x] * V[y, a]
                g += V[x, a] * bv
                gp = bv + btv
                gq = 1j * (bv - btv)
                col = x * d + a
                J[row, col] = gp.real
                J[row, dd + col] = gq.real
                J[m1 + row, col] = gp.imag
                J[m1 + row, dd + col] = gq.imag
            r[row] = g.real
            r[m1 + row] = g.imag
    o = 2 * m1
    t = 0
    for a in range(d):
        for b in range(a, d):
            s = 0j
            for x in range(d):
                s += np.conj(V[x, a]) * V[x, b]
            if a == b:
                s -= 1.0
            r[o + t] = s.real
            r[o + k + t] = s.imag
            for x in range(d):
                ca = x * d + a
                cb = x * d + b
                gpa = V[x, b]
                gqa = -1j * V[x, b]
                gpb = np.conj(V[x, a])
                gqb = 1j * np.conj(V[x, a])
                J[o + t, ca] += gpa.real
                J[o + t, dd + ca] += gqa.real
                J[o + k + t, ca] += gpa.imag
                J[o + k + t, dd + ca] += gqa.imag
                J[o + t, cb] += gpb.real
                J[o + t, dd + cb] += gqb.real
                J[o + k + t, cb] += gpb.imag
                J[o + k + t, dd + cb] += gqb.imag
            t += 1
    return r, J


# ---------------------------------------------------------------------------
# partial trace of a (K, D, K, D) reshaped density matrix over the D axes
# ---------------------------------------------------------------------------


def _trace_out_np(rho4):
    return np.einsum("itjt->ij", rho4)


@njit(cache=True)
def _trace_out_nb(rho4):
    K = rho4.shape[0]
    D = rho4.shape[1]
    out = np.zeros((K, K), dtype=np.complex128)
    for i in range(K):
        for j in range(K):
            acc = 0j
            for t in range(D):
                acc += rho4[i, t, j, t]
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# Gram matrix of row vectors
# ---------------------------------------------------------------------------


def _gram_np(V):
    return V.conj() @ V.T


@njit(cache=True)
def _gram_nb(V):
    n, N = V.shape
    G = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            acc = 0j
            for k in range(N):
                acc += np.conj(V[i, k]) * V[j, k]
            G[i, j] = acc
            if j != i:
                G[j, i] = np.conj(acc)
    return G


def select(use_numba):
    """Return ``(overlap_residuals, trace_out, gram)`` for the chosen backend."""
    if use_numba and _HAVE_NUMBA:
        return _overlap_residuals_nb, _trace_out_nb, _gram_nb
    return _overlap_residuals_np, _trace_out_np, _gram_np


overlap_residuals, trace_out, gram = select(USE_NUMBA)
