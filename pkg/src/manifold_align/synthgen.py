"""Seeded synthetic point clouds for the shape, ranking and Gaussian experiments.

Every generator is a pure function of its parameters and seed. Pairs of
datasets that are meant to be compared share their random component
(curve parameter, base draws, ring angles) so only the controlled factor
changes between them.
"""

from __future__ import annotations

import math

import numpy as np

from .matrix_io import FeatureMatrix, as_matrix


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def _check_n(n: int, minimum: int = 1):
    if n < minimum:
        raise ValueError(f"n must be >= {minimum}, got {n}")


def swiss_roll_from_t(t: np.ndarray) -> np.ndarray:
    z = 1.5 * np.pi * (1.0 + 2.0 * t)
    return np.column_stack([z * np.cos(z), z * np.sin(z)])


def s_curve_from_t(t: np.ndarray, r: float) -> np.ndarray:
    z = 3.0 * np.pi * (t - r)
    return np.column_stack([np.sin(z), np.sign(z) * (np.cos(z) - 1.0)])


def curve_parameter(n: int, seed: int) -> np.ndarray:
    _check_n(n)
    return _rng(seed).uniform(0.0, 1.0, size=n)


def gen_swiss_roll(n: int, seed: int):
    """Swiss roll in 2-D. Returns ``(matrix, t)``."""
    t = curve_parameter(n, seed)
    return FeatureMatrix(swiss_roll_from_t(t)), t


def gen_s_curve(n: int, r: float, seed: int):
    """S-curve shaped by ``r``; shares ``t`` with :func:`gen_swiss_roll` per seed."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r must lie in [0, 1], got {r}")
    t = curve_parameter(n, seed)
    return FeatureMatrix(s_curve_from_t(t, r)), t


def gen_gaussian_spot(n: int, d: int, seed: int) -> FeatureMatrix:
    _check_n(n)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    return FeatureMatrix(_rng(seed).standard_normal((n, d)))


def perturb(x, scale: float, seed: int) -> FeatureMatrix:
    x = as_matrix(x)
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    if scale == 0:
        return FeatureMatrix(x.data.copy())
    noise = _rng(seed).standard_normal(x.data.shape)
    return FeatureMatrix(x.data + scale * noise)


def lost_correspondence(n: int, d: int, seed_a: int, seed_b: int):
    if seed_a == seed_b:
        raise ValueError("lost-correspondence spots need distinct seeds")
    return gen_gaussian_spot(n, d, seed_a), gen_gaussian_spot(n, d, seed_b)


def gen_uniform_two_spots(n_per: int, d: int, t: float, seed: int) -> FeatureMatrix:
    """Two unit uniform cubes; the second is offset by ``1.1 + t`` along axis 0.

    Base draws depend only on the seed, so changing ``t`` moves the second
    spot without resampling it.
    """
    _check_n(n_per)
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    pts = _rng(seed).uniform(-0.5, 0.5, size=(2 * n_per, d))
    pts[n_per:, 0] += 1.1 + t
    return FeatureMatrix(pts)


RING_COUNT = 5


def ring_layout(n: int, seed: int):
    """Per-point ring label in 1..5 and angle in [0, 2 pi)."""
    _check_n(n, RING_COUNT)
    rng = _rng(seed)
    labels = rng.integers(1, RING_COUNT + 1, size=n)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return labels, angles


def gen_rings(n: int, stage: int, seed: int) -> FeatureMatrix:
    """Concentric rings; stage 5 has all five, stage 1 collapses them to r=0.5.

    Outer rings merge inward: a point on ring l sits on ring ``min(l, stage)``.
    """
    if stage not in range(1, RING_COUNT + 1):
        raise ValueError(f"stage must be in 1..5, got {stage}")
    labels, angles = ring_layout(n, seed)
    radius = 0.5 + 0.25 * (np.minimum(labels, stage) - 1)
    return FeatureMatrix(np.column_stack([radius * np.cos(angles), radius * np.sin(angles)]))


CLUSTER_RADIUS = 10.0


def gen_clusters(n: int, c: int, seed: int) -> FeatureMatrix:
    """A 2-D normal blob split into ``c`` contiguous groups on a radius-10 circle."""
    if not 1 <= c <= 12:
        raise ValueError(f"c must be in 1..12, got {c}")
    if n < c:
        raise ValueError(f"n={n} smaller than cluster count c={c}")
    pts = _rng(seed).standard_normal((n, 2))
    if c == 1:
        return FeatureMatrix(pts)
    for j, block in enumerate(np.array_split(np.arange(n), c)):
        angle = 2.0 * math.pi * j / c
        pts[block] += CLUSTER_RADIUS * np.array([math.cos(angle), math.sin(angle)])
    return FeatureMatrix(pts)
