"""Gaussian kernel evaluation, Gram assembly, and empirical mean embeddings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic Gaussian kernel exp(-||a - b||^2 / (2 * bandwidth_sq))."""

    bandwidth_sq: float
    input_dim: int
    family: str = "gaussian"

    def __post_init__(self) -> None:
        if self.bandwidth_sq <= 0.0:
            raise ValueError("bandwidth_sq must be positive")
        if self.family != "gaussian":
            raise ValueError(f"unsupported kernel family: {self.family!r}")


@dataclass(frozen=True)
class SampleSet:
    """Points drawn from one of the two marginals ('mu' source, 'nu' target)."""

    points: np.ndarray
    role: str = "mu"

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-D array (n, d)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("sample coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


def _check_dim(spec: KernelSpec, pts: np.ndarray, name: str) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != spec.input_dim:
        raise ValueError(
            f"{name} has dimension {pts.shape[1]}, kernel expects {spec.input_dim}"
        )
    return pts


def kernel_eval(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> float:
    a = _check_dim(spec, a, "a")
    b = _check_dim(spec, b, "b")
    sq = float(np.sum((a - b) ** 2))
    return float(np.exp(-sq / (2.0 * spec.bandwidth_sq)))


def gram_matrix(
    spec: KernelSpec, pts_a: np.ndarray, pts_b: np.ndarray | None = None
) -> np.ndarray:
    """Kernel matrix k(a_i, b_j); symmetric PSD up to round-off when b is a."""
    pts_a = _check_dim(spec, pts_a, "pts_a")
    square = pts_b is None
    pts_b = pts_a if square else _check_dim(spec, pts_b, "pts_b")
    sq = cdist(pts_a, pts_b, metric="sqeuclidean")
    g = np.exp(-sq / (2.0 * spec.bandwidth_sq))
    if square:
        g = 0.5 * (g + g.T)
        np.fill_diagonal(g, 1.0)
    return g


def mean_embedding_at(spec: KernelSpec, samples: SampleSet, query: np.ndarray) -> float:
    """Empirical mean embedding of the sample distribution evaluated at a point."""
    if len(samples) == 0:
        raise ValueError("sample set is empty")
    return float(np.mean(gram_matrix(spec, samples.points, np.atleast_2d(query))))


def mean_embedding(spec: KernelSpec, samples: SampleSet, queries: np.ndarray) -> np.ndarray:
    """Vectorized mean embedding over rows of ``queries``."""
    if len(samples) == 0:
        raise ValueError("sample set is empty")
    return gram_matrix(spec, samples.points, queries).mean(axis=0)


def embedding_norm_sq(spec: KernelSpec, samples: SampleSet) -> float:
    """Squared RKHS norm of the empirical mean embedding."""
    if len(samples) == 0:
        raise ValueError("sample set is empty")
    return float(np.mean(gram_matrix(spec, samples.points)))
