"""Dense and sparse kernels compared by the alignment metrics."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .matrix_io import as_matrix
from .neighbors import (
    SparseRowKernel,
    canonical_rows,
    check_k,
    knn_graph,
    pairwise_distances,
)


class ZeroMedianError(ValueError):
    """All relevant distances are zero, so a median bandwidth is undefined."""


@dataclass(frozen=True)
class SigmaPolicy:
    kind: str  # "median", "scaled_median" or "explicit"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("median", "scaled_median", "explicit"):
            raise ValueError(f"unknown sigma policy {self.kind!r}")
        if not self.value > 0:
            raise ValueError(f"sigma policy value must be positive, got {self.value}")

    @classmethod
    def median(cls) -> "SigmaPolicy":
        return cls("median")

    @classmethod
    def scaled_median(cls, delta: float) -> "SigmaPolicy":
        return cls("scaled_median", float(delta))

    @classmethod
    def explicit(cls, sigma: float) -> "SigmaPolicy":
        return cls("explicit", float(sigma))

    def resolve(self, d: np.ndarray) -> float:
        if self.kind == "explicit":
            return self.value
        m = median_distance(d)
        if m <= 0:
            raise ZeroMedianError("median pairwise distance is zero (all points identical)")
        return m if self.kind == "median" else self.value * m

    def label(self) -> str:
        if self.kind == "median":
            return "M"
        if self.kind == "scaled_median":
            return f"{self.value!r}M"
        return repr(self.value)


def linear_kernel(x) -> np.ndarray:
    x = as_matrix(x).data
    return x @ x.T


def median_distance(d: np.ndarray) -> float:
    """Median of the strict upper triangle of a distance matrix."""
    d = np.asarray(d)
    n = d.shape[0]
    if n < 2:
        raise ValueError("median distance needs at least two points")
    return float(np.median(d[np.triu_indices(n, k=1)]))


def rbf_from_distances(d: np.ndarray, sigma: float, squared: bool = False) -> np.ndarray:
    # exponent is ||x_i - x_j|| / (2 sigma^2) unless squared=True
    num = d * d if squared else d
    k = np.exp(-num / (2.0 * sigma * sigma))
    np.fill_diagonal(k, 1.0)
    return k


def rbf_kernel(x, policy: SigmaPolicy | None = None, squared: bool = False) -> np.ndarray:
    policy = policy or SigmaPolicy.median()
    d = pairwise_distances(x)
    return rbf_from_distances(d, policy.resolve(d), squared)


def knn_rbf_from_distances(d: np.ndarray, k: int, zero_diagonal: bool = False) -> SparseRowKernel:
    graph = knn_graph(d, k)
    sigma = float(np.median(graph.distances))
    if sigma <= 0:
        raise ZeroMedianError("median of retained neighbour distances is zero")
    weights = np.exp(-graph.distances / (2.0 * sigma))
    indices, weights = canonical_rows(graph.neighbors, weights)
    return SparseRowKernel(indices, weights, diagonal=0.0 if zero_diagonal else 1.0)


def knn_rbf_kernel(x, k: int, zero_diagonal: bool = False) -> SparseRowKernel:
    """RBF kernel masked to each row's k nearest neighbours.

    The bandwidth is one global scalar: the median over every retained
    neighbour distance. Entries are ``exp(-d / (2 sigma))``.
    """
    x = as_matrix(x)
    check_k(k, x.n_samples)
    return knn_rbf_from_distances(pairwise_distances(x), k, zero_diagonal)


def symmetrize_tconorm(ku: SparseRowKernel) -> np.ndarray:
    """Symmetrise a directed kernel with the probabilistic t-conorm a + b - ab."""
    a = ku.to_dense()
    at = a.T
    s = a + at - a * at
    np.fill_diagonal(s, 1.0)
    return s


def dense_to_csv(k: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("i,j,value\n")
    n = k.shape[0]
    for i in range(n):
        for j in range(n):
            buf.write(f"{i},{j},{float(k[i, j])!r}\n")
    return buf.getvalue()
