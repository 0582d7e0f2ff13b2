"""Exact k-NN graphs, per-row bandwidth calibration and the manifold kernel.

Each manifold-kernel row keeps its point (weight 1) plus its k nearest
neighbours, weighted ``exp(-(d_ij - rho_i) / sigma_i)``. ``sigma_i`` is found
by bisection so that the neighbour weights sum to ``log2(k)``, which puts the
full row sum at ``1 + log2(k)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .matrix_io import as_matrix

SIGMA_MIN = 1e-12
SIGMA_MAX = 1e3
SIGMA_CAP = 1e9
CALIBRATION_EPS = 1e-12
MAX_BISECT_ITER = 200
ROW_SUM_RTOL = 1e-6


class KOutOfRangeError(ValueError):
    pass


def check_k(k: int, n: int) -> int:
    if int(k) != k:
        raise KOutOfRangeError(f"k must be an integer, got {k!r}")
    k = int(k)
    if not 2 <= k <= n - 1:
        raise KOutOfRangeError(f"k={k} outside [2, n-1] for n={n}")
    return k


@dataclass(frozen=True)
class KnnGraph:
    neighbors: np.ndarray  # (n, k) int64, ascending by distance
    distances: np.ndarray  # (n, k)
    sigma: np.ndarray | None = None
    clamped: np.ndarray | None = None  # int8: 0 ok, 1 clamped low, 2 clamped high

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]

    @property
    def k(self) -> int:
        return self.neighbors.shape[1]

    @property
    def rho(self) -> np.ndarray:
        return self.distances[:, 0]

    def truncate(self, k: int) -> "KnnGraph":
        """Graph for a smaller k; neighbour lists are prefixes under the tie rule."""
        k = check_k(k, self.n)
        if k > self.k:
            raise KOutOfRangeError(f"cannot grow a k={self.k} graph to k={k}")
        return KnnGraph(self.neighbors[:, :k].copy(), self.distances[:, :k].copy())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("row,neighbor,distance,rho,sigma,clamped\n")
        sigma = self.sigma if self.sigma is not None else np.full(self.n, np.nan)
        clamped = self.clamped if self.clamped is not None else np.zeros(self.n, np.int8)
        for i in range(self.n):
            for j, dist in zip(self.neighbors[i], self.distances[i]):
                buf.write(
                    f"{i},{j},{dist!r},{self.distances[i, 0]!r},{sigma[i]!r},{int(clamped[i])}\n"
                )
        return buf.getvalue()


@dataclass(frozen=True)
class SparseRowKernel:
    """Row-sparse kernel: a diagonal constant plus k weighted entries per row.

    ``indices`` are strictly increasing along each row. ``declared_row_sum`` is
    ``None`` for kernels whose rows carry no constraint.
    """

    indices: np.ndarray  # (n, k) int64
    weights: np.ndarray  # (n, k)
    diagonal: float = 1.0
    declared_row_sum: float | None = None
    clamped: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def row_sums(self) -> np.ndarray:
        return self.diagonal + self.weights.sum(axis=1)

    def max_row_sum_deviation(self) -> float:
        if self.declared_row_sum is None:
            return math.inf
        return float(np.max(np.abs(self.row_sums() - self.declared_row_sum)))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        np.put_along_axis(out, self.indices, self.weights, axis=1)
        np.fill_diagonal(out, self.diagonal)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,j,value\n")
        for i in range(self.n):
            entries = [(i, self.diagonal)] + list(zip(self.indices[i].tolist(), self.weights[i]))
            for j, v in sorted(entries):
                if v != 0.0:
                    buf.write(f"{i},{j},{float(v)!r}\n")
        return buf.getvalue()


def canonical_rows(indices: np.ndarray, weights: np.ndarray):
    order = np.argsort(indices, axis=1, kind="stable")
    return np.take_along_axis(indices, order, axis=1), np.take_along_axis(weights, order, axis=1)


def pairwise_distances(x) -> np.ndarray:
    """Euclidean distance matrix, exactly symmetric with a zero diagonal."""
    x = as_matrix(x)
    return _kernels.pairwise_distances(np.ascontiguousarray(x.data))


def knn_graph(d: np.ndarray, k: int) -> KnnGraph:
    """k nearest neighbours per row from a distance matrix, self excluded.

    Ties go to the lower sample index.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    k = check_k(k, d.shape[0])
    idx, vals = _kernels.knn_select(d, k)
    return KnnGraph(idx, vals)


def calibrate_row(neighbor_distances, target: float):
    """Return ``(rho, sigma)`` for one ascending row of neighbour distances."""
    row = np.asarray(neighbor_distances, dtype=np.float64).reshape(1, -1)
    if row.shape[1] < 2:
        raise KOutOfRangeError("need at least two neighbour distances")
    sigma, _ = _kernels.calibrate_rows(
        row, float(target), SIGMA_MIN, SIGMA_MAX, SIGMA_CAP, CALIBRATION_EPS, MAX_BISECT_ITER
    )
    return float(row[0, 0]), float(sigma[0])


def calibrate_graph(graph: KnnGraph) -> KnnGraph:
    sigma, flag = _kernels.calibrate_rows(
        np.ascontiguousarray(graph.distances),
        math.log2(graph.k),
        SIGMA_MIN,
        SIGMA_MAX,
        SIGMA_CAP,
        CALIBRATION_EPS,
        MAX_BISECT_ITER,
    )
    return replace(graph, sigma=sigma, clamped=flag)


def manifold_kernel_from_graph(graph: KnnGraph) -> SparseRowKernel:
    if graph.sigma is None:
        graph = calibrate_graph(graph)
    gaps = graph.distances - graph.distances[:, :1]
    weights = np.exp(-gaps / graph.sigma[:, None])
    indices, weights = canonical_rows(graph.neighbors, weights)
    return SparseRowKernel(
        indices=indices,
        weights=weights,
        diagonal=1.0,
        declared_row_sum=1.0 + math.log2(graph.k),
        clamped=graph.clamped != 0,
    )


def manifold_kernel(x, k: int) -> SparseRowKernel:
    """Manifold-approximated kernel of a feature matrix with k neighbours per row."""
    x = as_matrix(x)
    check_k(k, x.n_samples)
    return manifold_kernel_from_graph(knn_graph(pairwise_distances(x), k))
