"""Compare the compiled and numpy series evaluation kernels.

Usage: python3 benchmarks/bench_eval.py [--order 8] [--points 2000] [--repeat 5]

Both kernels evaluate the same packed series (a second derivative of the
particular potential) at the same seeded points; the script checks they
agree and prints the best wall time of each.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from closure14 import _pykernels
from closure14.packed import PackedSeries, points_array
from closure14.ring import ExpFamily
from closure14.series import random_points
from closure14.solutions import build_H1


def kernel_inputs(order: int, n_points: int, seed: int):
    H = build_H1(order)
    P = PackedSeries.from_series(H).differentiate("mu_vec").differentiate("mu_mat")
    pts = points_array(random_points(n_points, seed))
    real = ExpFamily()
    psis, inv = np.unique(P.psi[P.has_psi], axis=0, return_inverse=True)
    col = np.full(len(P), -1, dtype=np.int32)
    col[P.has_psi] = inv.ravel()
    psi_vals = np.array([[real.value(int(n), int(k), p[0], p[13]) for n, k in psis] for p in pts],
                        dtype=float).reshape(len(pts), len(psis))
    width = 3 ** P.free_rank
    top = int(P.orders().max())
    out_col = (P.orders() * width + P.out).astype(np.int32)
    args = (np.ascontiguousarray(P.mono, dtype=np.int32), np.ascontiguousarray(P.coef, dtype=float),
            np.ascontiguousarray(P.lam_exp, dtype=np.int32), col, out_col,
            np.ascontiguousarray(pts), np.ascontiguousarray(psi_vals), (top + 1) * width)
    return args, len(P)


def best_time(fn, args, repeat: int):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--order", type=int, default=8)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    inputs, n_terms = kernel_inputs(args.order, args.points, args.seed)
    print(f"terms={n_terms} points={args.points} order={args.order}")
    t_py, ref = best_time(_pykernels.eval_batch, inputs, args.repeat)
    print(f"numpy   {t_py * 1e3:9.2f} ms")
    try:
        from closure14 import _ckernels
    except ImportError:
        print("cython  not built (pip install -e . --no-build-isolation)")
        return 0
    t_c, got = best_time(_ckernels.eval_batch, inputs, args.repeat)
    scale = max(1.0, float(np.max(np.abs(ref))))
    diff = float(np.max(np.abs(got - ref))) / scale
    print(f"cython  {t_c * 1e3:9.2f} ms   speedup {t_py / t_c:5.2f}x   max rel diff {diff:.2e}")
    return 0 if diff <= 1e-12 else 1


if __name__ == "__main__":
    raise SystemExit(main())
