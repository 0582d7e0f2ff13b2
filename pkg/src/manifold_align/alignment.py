"""HSIC, CKA, MKA and the small statistics used by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .kernels import (
    SigmaPolicy,
    knn_rbf_from_distances,
    linear_kernel,
    rbf_from_distances,
    symmetrize_tconorm,
)
from .matrix_io import as_matrix
from .neighbors import (
    ROW_SUM_RTOL,
    SparseRowKernel,
    check_k,
    knn_graph,
    manifold_kernel_from_graph,
    pairwise_distances,
)

NAIVE_MAX_N = 5000


class DimensionMismatchError(ValueError):
    pass


class DegenerateKernelError(ValueError):
    """A kernel has zero centred norm, so the normalised score is undefined."""


class MismatchedKError(ValueError):
    pass


@dataclass(frozen=True)
class AlignmentScore:
    metric: str
    value: float
    params: dict = field(default_factory=dict)


def _same_n(a: int, b: int):
    if a != b:
        raise DimensionMismatchError(f"sample counts differ: {a} vs {b}")


def _double_center(l: np.ndarray) -> np.ndarray:
    return l - l.mean(axis=0, keepdims=True) - l.mean(axis=1, keepdims=True) + l.mean()


def hsic(k: np.ndarray, l: np.ndarray) -> float:
    """trace(K H L H) / (n - 1)^2 without forming H."""
    k = np.asarray(k, dtype=np.float64)
    l = np.asarray(l, dtype=np.float64)
    if k.shape != l.shape or k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise DimensionMismatchError(f"kernel shapes differ: {k.shape} vs {l.shape}")
    n = k.shape[0]
    if n < 2:
        raise DimensionMismatchError("HSIC needs n >= 2")
    return float(np.sum(k * _double_center(l).T)) / (n - 1) ** 2


def _check_nondegenerate(self_hsic: float, kern: np.ndarray, name: str):
    n = kern.shape[0]
    scale = (np.linalg.norm(kern) / (n - 1)) ** 2
    if not self_hsic > 1e-12 * scale:
        raise DegenerateKernelError(f"{name} has zero centred self-similarity")


def cka(k: np.ndarray, l: np.ndarray) -> float:
    kl = hsic(k, l)
    kk = hsic(k, k)
    ll = hsic(l, l)
    _check_nondegenerate(kk, np.asarray(k), "first kernel")
    _check_nondegenerate(ll, np.asarray(l), "second kernel")
    return kl / math.sqrt(kk * ll)


def frobenius_sparse(ku: SparseRowKernel, lu: SparseRowKernel) -> float:
    """Elementwise inner product of two row-sparse kernels in O(n k)."""
    _same_n(ku.n, lu.n)
    off = _kernels.sparse_inner(
        np.ascontiguousarray(ku.indices),
        np.ascontiguousarray(ku.weights),
        np.ascontiguousarray(lu.indices),
        np.ascontiguousarray(lu.weights),
    )
    return ku.n * ku.diagonal * lu.diagonal + float(off)


def _fast_premise_holds(ku: SparseRowKernel, lu: SparseRowKernel) -> bool:
    d = ku.declared_row_sum
    return (
        ku.max_row_sum_deviation() <= ROW_SUM_RTOL * d
        and lu.max_row_sum_deviation() <= ROW_SUM_RTOL * d
    )


def _closed_form(ku: SparseRowKernel, lu: SparseRowKernel) -> float:
    d2 = ku.declared_row_sum**2
    kl = frobenius_sparse(ku, lu) - d2
    kk = frobenius_sparse(ku, ku) - d2
    ll = frobenius_sparse(lu, lu) - d2
    if not (kk > 0 and ll > 0):
        raise DegenerateKernelError("centred kernel norm is not positive")
    return kl / math.sqrt(kk * ll)


def _check_pair(ku: SparseRowKernel, lu: SparseRowKernel):
    _same_n(ku.n, lu.n)
    if ku.declared_row_sum is None or lu.declared_row_sum is None:
        raise MismatchedKError("closed form needs kernels with a declared row sum; use mka_naive")
    if ku.declared_row_sum != lu.declared_row_sum:
        raise MismatchedKError(
            f"row sums differ (k={ku.k} vs k={lu.k}); the closed form does not apply, use mka_naive"
        )


def mka_with_path(ku: SparseRowKernel, lu: SparseRowKernel) -> tuple[float, str]:
    """MKA value and which evaluation ran ("fast" or "naive")."""
    _check_pair(ku, lu)
    if _fast_premise_holds(ku, lu):
        return _closed_form(ku, lu), "fast"
    return mka_naive(ku, lu), "naive"


def mka_fast(ku: SparseRowKernel, lu: SparseRowKernel) -> float:
    """Closed-form MKA for constant-row-sum kernels.

    Falls back to :func:`mka_naive` when a clamped row breaks the row-sum
    premise by more than ``1e-6 * D``.
    """
    return mka_with_path(ku, lu)[0]


def _as_dense(k) -> np.ndarray:
    return k.to_dense() if isinstance(k, SparseRowKernel) else np.asarray(k, dtype=np.float64)


def mka_naive(ku, lu) -> float:
    """Row-centred cosine similarity of two (densified) kernels."""
    n_k = ku.n if isinstance(ku, SparseRowKernel) else np.asarray(ku).shape[0]
    n_l = lu.n if isinstance(lu, SparseRowKernel) else np.asarray(lu).shape[0]
    _same_n(n_k, n_l)
    if n_k > NAIVE_MAX_N:
        raise ValueError(f"n={n_k} exceeds the dense evaluation guard ({NAIVE_MAX_N})")
    kb = _as_dense(ku)
    lb = _as_dense(lu)
    kb = kb - kb.mean(axis=1, keepdims=True)
    lb = lb - lb.mean(axis=1, keepdims=True)
    kk = float(np.sum(kb * kb))
    ll = float(np.sum(lb * lb))
    if not (kk > 0 and ll > 0):
        raise DegenerateKernelError("row-centred kernel is identically zero")
    return float(np.sum(kb * lb)) / math.sqrt(kk * ll)


def scale_divergence(value: float, gamma: float) -> float:
    """Map a divergence in [0, inf) to (0, 1] via exp(-value / gamma)."""
    if value < 0:
        raise ValueError("divergence must be nonnegative")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return math.exp(-value / gamma)


def kendall_tau(a, b) -> float:
    """Tie-corrected Kendall tau-b by explicit pair enumeration."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    m = a.size
    if m < 2:
        raise ValueError("need at least two observations")
    i, j = np.triu_indices(m, k=1)
    sa = np.sign(a[j] - a[i])
    sb = np.sign(b[j] - b[i])
    s = float(np.sum(sa * sb))
    untied_a = float(np.count_nonzero(sa))
    untied_b = float(np.count_nonzero(sb))
    if untied_a == 0 or untied_b == 0:
        raise ValueError("tau undefined: one sequence is entirely tied")
    return s / math.sqrt(untied_a * untied_b)


# feature-level conveniences used by the CLI and the experiment runner


def cka_linear(x, y) -> float:
    return cka(linear_kernel(x), linear_kernel(y))


def cka_rbf(x, y, policy: SigmaPolicy | None = None, squared: bool = False) -> float:
    policy = policy or SigmaPolicy.median()
    dx, dy = pairwise_distances(x), pairwise_distances(y)
    return cka(
        rbf_from_distances(dx, policy.resolve(dx), squared),
        rbf_from_distances(dy, policy.resolve(dy), squared),
    )


def kcka(x, y, k: int, zero_diagonal: bool = False) -> float:
    x, y = as_matrix(x), as_matrix(y)
    _same_n(x.n_samples, y.n_samples)
    check_k(k, x.n_samples)
    kx = knn_rbf_from_distances(pairwise_distances(x), k, zero_diagonal)
    ky = knn_rbf_from_distances(pairwise_distances(y), k, zero_diagonal)
    return cka(kx.to_dense(), ky.to_dense())


def _manifold_pair(x, y, k):
    x, y = as_matrix(x), as_matrix(y)
    _same_n(x.n_samples, y.n_samples)
    check_k(k, x.n_samples)
    ku = manifold_kernel_from_graph(knn_graph(pairwise_distances(x), k))
    lu = manifold_kernel_from_graph(knn_graph(pairwise_distances(y), k))
    return ku, lu


def mka(x, y, k: int) -> float:
    """MKA between two feature matrices with k neighbours per row."""
    return mka_fast(*_manifold_pair(x, y, k))


def cka_sym_manifold(x, y, k: int) -> float:
    ku, lu = _manifold_pair(x, y, k)
    return cka(symmetrize_tconorm(ku), symmetrize_tconorm(lu))
