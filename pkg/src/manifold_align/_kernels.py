"""Hot numeric loops, each in a numba flavour and a pure-numpy flavour.

The public dispatchers at the bottom pick numba when it is available and
enabled (see ``_accel``). Both flavours are importable directly so the
benchmark script and the test-suite can compare them.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAS_NUMBA, njit, prange

CLAMP_NONE = 0
CLAMP_LOW = 1
CLAMP_HIGH = 2

_CHUNK_ELEMS = 8_000_000


# ---------------------------------------------------------------- numpy path


def pairwise_distances_numpy(x: np.ndarray) -> np.ndarray:
    n, d = x.shape
    out = np.empty((n, n), dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, n * d))
    for start in range(0, n, step):
        stop = min(n, start + step)
        diff = x[start:stop, None, :] - x[None, :, :]
        out[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(out, 0.0)
    return out


def knn_select_numpy(dist: np.ndarray, k: int):
    n = dist.shape[0]
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    return order.astype(np.int64), np.take_along_axis(dist, order, axis=1)


def _row_sums_numpy(gaps: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return np.exp(-gaps / sigma[:, None]).sum(axis=1)


def calibrate_rows_numpy(dists, target, sigma_min, sigma_max, sigma_cap, eps, max_iter):
    """Vectorised bisection across rows; mirrors ``calibrate_rows_numba`` step for step."""
    n = dists.shape[0]
    gaps = dists - dists[:, :1]
    sigma = np.empty(n)
    flag = np.zeros(n, dtype=np.int8)

    f_lo = _row_sums_numpy(gaps, np.full(n, sigma_min))
    low = f_lo >= target - eps
    sigma[low] = sigma_min
    flag[low] = CLAMP_LOW

    hi = np.full(n, float(sigma_max))
    f_hi = _row_sums_numpy(gaps, hi)
    grow = ~low & (f_hi < target) & (hi < sigma_cap)
    while grow.any():
        hi[grow] = np.minimum(hi[grow] * 2.0, sigma_cap)
        f_hi[grow] = _row_sums_numpy(gaps[grow], hi[grow])
        grow = ~low & (f_hi < target) & (hi < sigma_cap)
    high = ~low & (f_hi < target - eps)
    sigma[high] = hi[high]
    flag[high] = CLAMP_HIGH

    done = ~low & ~high & (np.abs(f_hi - target) <= eps)
    sigma[done] = hi[done]

    active = ~(low | high | done)
    lo = np.full(n, float(sigma_min))
    mid = hi.copy()
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        m = 0.5 * (lo[idx] + hi[idx])
        stalled = (m <= lo[idx]) | (m >= hi[idx])
        mid[idx[stalled]] = m[stalled]
        idx, m = idx[~stalled], m[~stalled]
        f = _row_sums_numpy(gaps[idx], m)
        mid[idx] = m
        hit = np.abs(f - target) <= eps
        above = ~hit & (f > target)
        below = ~hit & ~above
        hi[idx[above]] = m[above]
        lo[idx[below]] = m[below]
        active[:] = False
        active[idx[~hit]] = True
    sigma[~(low | high | done)] = mid[~(low | high | done)]
    return sigma, flag


def sparse_inner_numpy(idx_a, w_a, idx_b, w_b) -> float:
    """Off-diagonal Frobenius inner product of two row-sparse kernels.

    Column indices must be ascending within each row.
    """
    n, ka = idx_a.shape
    kb = idx_b.shape[1]
    rows_a = np.repeat(np.arange(n, dtype=np.int64), ka)
    rows_b = np.repeat(np.arange(n, dtype=np.int64), kb)
    keys_a = rows_a * n + idx_a.ravel()
    keys_b = rows_b * n + idx_b.ravel()
    pos = np.searchsorted(keys_a, keys_b)
    pos_c = np.minimum(pos, keys_a.size - 1)
    hit = keys_a[pos_c] == keys_b
    prod = np.zeros(n * kb)
    prod[hit] = w_a.ravel()[pos_c[hit]] * w_b.ravel()[hit]
    return float(prod.reshape(n, kb).sum(axis=1).sum())


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:

    @njit(parallel=True, cache=True)
    def pairwise_distances_numba(x):
        n, d = x.shape
        out = np.zeros((n, n))
        for i in prange(n):
            for j in range(i + 1, n):
                acc = 0.0
                for f in range(d):
                    t = x[i, f] - x[j, f]
                    acc += t * t
                r = np.sqrt(acc)
                out[i, j] = r
                out[j, i] = r
        return out

    @njit(parallel=True, cache=True)
    def knn_select_numba(dist, k):
        n = dist.shape[0]
        idx = np.empty((n, k), dtype=np.int64)
        vals = np.empty((n, k))
        for i in prange(n):
            row = dist[i].copy()
            row[i] = np.inf
            order = np.argsort(row, kind="mergesort")
            for j in range(k):
                idx[i, j] = order[j]
                vals[i, j] = dist[i, order[j]]
        return idx, vals

    @njit(cache=True)
    def _row_sum_numba(d, sigma):
        rho = d[0]
        acc = 0.0
        for j in range(d.shape[0]):
            acc += np.exp(-(d[j] - rho) / sigma)
        return acc

    @njit(parallel=True, cache=True)
    def calibrate_rows_numba(dists, target, sigma_min, sigma_max, sigma_cap, eps, max_iter):
        n = dists.shape[0]
        sigma = np.empty(n)
        flag = np.zeros(n, dtype=np.int8)
        for i in prange(n):
            d = dists[i]
            if _row_sum_numba(d, sigma_min) >= target - eps:
                sigma[i] = sigma_min
                flag[i] = 1
                continue
            hi = sigma_max
            f_hi = _row_sum_numba(d, hi)
            while f_hi < target and hi < sigma_cap:
                hi = min(hi * 2.0, sigma_cap)
                f_hi = _row_sum_numba(d, hi)
            if f_hi < target - eps:
                sigma[i] = hi
                flag[i] = 2
                continue
            if abs(f_hi - target) <= eps:
                sigma[i] = hi
                continue
            lo = sigma_min
            mid = hi
            for _ in range(max_iter):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                f = _row_sum_numba(d, mid)
                if abs(f - target) <= eps:
                    break
                if f > target:
                    hi = mid
                else:
                    lo = mid
            sigma[i] = mid
        return sigma, flag

    @njit(parallel=True, cache=True)
    def sparse_inner_numba(idx_a, w_a, idx_b, w_b):
        n, ka = idx_a.shape
        kb = idx_b.shape[1]
        partial = np.zeros(n)
        for i in prange(n):
            p = 0
            q = 0
            acc = 0.0
            while p < ka and q < kb:
                a = idx_a[i, p]
                b = idx_b[i, q]
                if a == b:
                    acc += w_a[i, p] * w_b[i, q]
                    p += 1
                    q += 1
                elif a < b:
                    p += 1
                else:
                    q += 1
            partial[i] = acc
        return partial.sum()

    pairwise_distances = pairwise_distances_numba
    knn_select = knn_select_numba
    calibrate_rows = calibrate_rows_numba
    sparse_inner = sparse_inner_numba
else:
    pairwise_distances = pairwise_distances_numpy
    knn_select = knn_select_numpy
    calibrate_rows = calibrate_rows_numpy
    sparse_inner = sparse_inner_numpy
