"""Synthetic instance generation: Gaussian-mixture samples and Sobol filling points.

The Sobol points use the standard direction numbers but are emitted in
natural (radical-inverse) index order rather than Gray-code order, with
the all-zeros leading point skipped; in one dimension this is exactly the
van der Corput sequence 1/2, 1/4, 3/4, 1/8, ...
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from kot.kernels import SampleSet
from kot.problem import FillingPoints

MAX_SOBOL_DIM = 64


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: tuple[float, ...]
    std: float


@dataclass(frozen=True)
class MixtureSpec:
    """Isotropic Gaussian mixture with weights summing to one."""

    dim: int
    components: tuple[MixtureComponent, ...]
    seed: int

    def __post_init__(self) -> None:
        if self.dim < 1 or not self.components:
            raise ValueError("need dim >= 1 and at least one component")
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"component weights sum to {total}, expected 1")
        for c in self.components:
            if c.weight <= 0.0 or c.std <= 0.0 or len(c.mean) != self.dim:
                raise ValueError("invalid mixture component")


def default_mixture(dim: int, n_components: int, seed: int) -> MixtureSpec:
    """Equal-weight components with seeded uniform means in the unit box, std 0.1."""
    rng = np.random.default_rng(seed)
    means = rng.uniform(size=(n_components, dim))
    comps = tuple(
        MixtureComponent(weight=1.0 / n_components, mean=tuple(m), std=0.1)
        for m in means
    )
    return MixtureSpec(dim=dim, components=comps, seed=seed)


def sample_mixture(spec: MixtureSpec, count: int, role: str = "mu") -> SampleSet:
    """Draw ``count`` points; deterministic for a fixed spec (seed included)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(spec.seed)
    weights = np.array([c.weight for c in spec.components])
    means = np.array([c.mean for c in spec.components])
    stds = np.array([c.std for c in spec.components])
    which = rng.choice(len(spec.components), size=count, p=weights)
    pts = means[which] + stds[which, None] * rng.standard_normal((count, spec.dim))
    return SampleSet(points=pts, role=role)


def _gray(k: int) -> int:
    return k ^ (k >> 1)


def sobol_natural(dim: int, index: int, count: int) -> np.ndarray:
    """Sobol points at natural indices index+1 .. index+count in [0, 1)^dim.

    Library generators emit the sequence in Gray-code order; reindexing by
    the Gray code recovers natural order, which also skips the all-zeros
    point at index 0.
    """
    if dim < 1 or dim > MAX_SOBOL_DIM:
        raise ValueError(f"Sobol dimension must be in [1, {MAX_SOBOL_DIM}]")
    if count < 1 or index < 0:
        raise ValueError("need count >= 1 and index >= 0")
    need = index + count + 1
    m = max(1, math.ceil(math.log2(need)))
    total = 1 << m
    gray_pts = qmc.Sobol(d=dim, scramble=False).random(total)
    natural = np.empty_like(gray_pts)
    positions = np.fromiter((_gray(p) for p in range(total)), dtype=np.int64, count=total)
    natural[positions] = gray_pts
    return natural[index + 1 : index + 1 + count]


@dataclass
class SobolStream:
    """Stateful natural-order Sobol cursor; ``take`` advances the index."""

    dim: int
    index: int = 0

    def take(self, count: int) -> np.ndarray:
        pts = sobol_natural(self.dim, self.index, count)
        self.index += count
        return pts


def sobol_points(
    dim: int,
    count: int,
    lower: np.ndarray | float = 0.0,
    upper: np.ndarray | float = 1.0,
) -> FillingPoints:
    """Paired filling points from a ``dim``-dimensional Sobol sequence.

    ``dim`` must be even: the first half of each coordinate block is mapped
    affinely into [lower, upper] to form the source points, the second half
    the target points.
    """
    if dim % 2 != 0:
        raise ValueError("paired filling points need an even Sobol dimension")
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (dim,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (dim,))
    if not np.all(upper > lower):
        raise ValueError("domain box must have positive extent")
    unit = sobol_natural(dim, 0, count)
    scaled = lower + unit * (upper - lower)
    d = dim // 2
    return FillingPoints(x_tilde=scaled[:, :d], y_tilde=scaled[:, d:])
