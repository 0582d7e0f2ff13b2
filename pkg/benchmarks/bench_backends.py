"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_backends.py --n 2000 --d 50 --k 100 --repeat 5

The first numba call is a warm-up (JIT compile or cache load) and is not timed.
"""

import argparse
import math
import time

import numpy as np

from manifold_align import _kernels
from manifold_align.neighbors import (
    CALIBRATION_EPS,
    MAX_BISECT_ITER,
    SIGMA_CAP,
    SIGMA_MAX,
    SIGMA_MIN,
    canonical_rows,
)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--d", type=int, default=50)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba backend unavailable (unset MANIFOLD_ALIGN_NUMBA=0 or install numba)")

    rng = np.random.default_rng(args.seed)
    x = rng.standard_normal((args.n, args.d))
    y = rng.standard_normal((args.n, args.d))
    dist = _kernels.pairwise_distances_numpy(x)
    idx, nd = _kernels.knn_select_numpy(dist, args.k)
    idx_b, _ = _kernels.knn_select_numpy(_kernels.pairwise_distances_numpy(y), args.k)
    calib = (nd, math.log2(args.k), SIGMA_MIN, SIGMA_MAX, SIGMA_CAP, CALIBRATION_EPS, MAX_BISECT_ITER)
    # sparse_inner wants column indices ascending per row
    idx, w = canonical_rows(idx, np.exp(-(nd - nd[:, :1]) / 0.5))
    idx_b, w_b = canonical_rows(idx_b, w[::-1].copy())

    cases = {
        "pairwise_distances": (
            lambda: _kernels.pairwise_distances_numpy(x),
            lambda: _kernels.pairwise_distances_numba(x),
        ),
        "knn_select": (
            lambda: _kernels.knn_select_numpy(dist, args.k),
            lambda: _kernels.knn_select_numba(dist, args.k),
        ),
        "calibrate_rows": (
            lambda: _kernels.calibrate_rows_numpy(*calib),
            lambda: _kernels.calibrate_rows_numba(*calib),
        ),
        "sparse_inner": (
            lambda: _kernels.sparse_inner_numpy(idx, w, idx_b, w_b),
            lambda: _kernels.sparse_inner_numba(idx, w, idx_b, w_b),
        ),
    }

    print(f"n={args.n} d={args.d} k={args.k} best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}  max|diff|")
    for name, (f_np, f_nb) in cases.items():
        f_nb()
        t_np, out_np = best_of(f_np, args.repeat)
        t_nb, out_nb = best_of(f_nb, args.repeat)
        a = out_np[0] if isinstance(out_np, tuple) else out_np
        b = out_nb[0] if isinstance(out_nb, tuple) else out_nb
        diff = float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))
        print(f"{name:<20}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
