"""Backend selection for the hot kernels.

Set ``MANIFOLD_ALIGN_NUMBA=0`` before import to force the pure-numpy path.
When numba is missing the numpy path is used silently.
"""

from __future__ import annotations

import os

_flag = os.environ.get("MANIFOLD_ALIGN_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    if not _wanted:
        raise ImportError("disabled by MANIFOLD_ALIGN_NUMBA")
    import numba
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"


def worker_count() -> int:
    """Worker cap from ``MANIFOLD_ALIGN_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("MANIFOLD_ALIGN_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    cores = os.cpu_count() or 1
    if n <= 0:
        return cores
    return min(n, cores)


if HAS_NUMBA:
    # the system TBB is too old; omp is thread-safe for concurrent callers
    numba.config.THREADING_LAYER = os.environ.get("NUMBA_THREADING_LAYER", "omp")
    numba.set_num_threads(min(worker_count(), numba.config.NUMBA_NUM_THREADS))
