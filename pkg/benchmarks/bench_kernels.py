"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Reports per-call times for the residual/Jacobian kernel, the partial trace
and the Gram kernel, plus an end-to-end basis search, for both backends.
Numba compilation is excluded by warming up first.
"""

import argparse
import timeit

import numpy as np

from loccact import _kernels, _search
from loccact.catalog import get
from loccact.protocols import party_matrices


def _cases(rng):
    T = party_matrices(get("example3").state_set, "A")
    T = T / np.linalg.norm(T.reshape(len(T), -1), axis=1)[:, None, None]
    B = _kernels.pair_forms(T)
    z = rng.normal(size=2 * 25)
    rho4 = rng.normal(size=(5, 25, 5, 25)) + 1j * rng.normal(size=(5, 25, 5, 25))
    V = rng.normal(size=(6, 125)) + 1j * rng.normal(size=(6, 125))
    return T, B, z, rho4, V


def run(repeat):
    rng = np.random.default_rng(0)
    T, B, z, rho4, V = _cases(rng)
    rows = []
    for use_numba in (True, False):
        residuals, trace_out, gram = _kernels.select(use_numba)
        residuals(z, B, 5), trace_out(rho4), gram(V)  # warm up
        name = "numba" if use_numba else "numpy"
        t_res = min(timeit.repeat(lambda: residuals(z, B, 5), number=200, repeat=repeat)) / 200
        t_tr = min(timeit.repeat(lambda: trace_out(rho4), number=200, repeat=repeat)) / 200
        t_gr = min(timeit.repeat(lambda: gram(V), number=200, repeat=repeat)) / 200

        saved = _kernels.overlap_residuals
        _kernels.overlap_residuals = residuals
        try:
            def search():
                _search.orthogonalizing_basis(T, np.random.default_rng(1), _search.SearchBudget(restarts=4))

            search()
            t_s = min(timeit.repeat(search, number=5, repeat=repeat)) / 5
        finally:
            _kernels.overlap_residuals = saved
        rows.append((name, t_res, t_tr, t_gr, t_s))

    print(f"{'backend':8s} {'residuals':>12s} {'trace_out':>12s} {'gram':>12s} {'search':>12s}")
    for name, *ts in rows:
        print(f"{name:8s} " + " ".join(f"{t * 1e6:10.1f}us" for t in ts))
    base = rows[1]
    print("speedup  " + " ".join(f"{b / a:11.1f}x" for a, b in zip(rows[0][1:], base[1:])))


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    run(ap.parse_args().repeat)
