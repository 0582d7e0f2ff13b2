"""Manifold-approximated kernel alignment and CKA variants for comparing representations."""

from ._accel import backend
from .alignment import (
    AlignmentScore,
    DegenerateKernelError,
    DimensionMismatchError,
    MismatchedKError,
    cka,
    cka_linear,
    cka_rbf,
    cka_sym_manifold,
    frobenius_sparse,
    hsic,
    kcka,
    kendall_tau,
    mka,
    mka_fast,
    mka_naive,
    mka_with_path,
    scale_divergence,
)
from .kernels import (
    SigmaPolicy,
    ZeroMedianError,
    knn_rbf_kernel,
    linear_kernel,
    median_distance,
    rbf_kernel,
    symmetrize_tconorm,
)
from .matrix_io import FeatureMatrix, MatrixFormatError, load_matrix, save_matrix
from .neighbors import (
    KnnGraph,
    KOutOfRangeError,
    SparseRowKernel,
    calibrate_graph,
    calibrate_row,
    knn_graph,
    manifold_kernel,
    pairwise_distances,
)

__version__ = "0.1.0"
