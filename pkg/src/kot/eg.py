"""One projected extragradient step on the saddle-point form of the dual.

Serves as the independently convergent safeguard sequence interleaved
with the Newton steps; the vector block is unconstrained, the matrix
block is projected back onto the PSD cone after each half step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kot.problem import IteratePair, ProblemData, constraint_matrix, objective_grad, phi_forward
from kot.psdcone import proj_psd


@dataclass(frozen=True)
class EgConfig:
    stepsize: float = 0.01

    def __post_init__(self) -> None:
        if self.stepsize <= 0.0:
            raise ValueError("stepsize must be positive")


def _field(pd: ProblemData, gamma: np.ndarray, x_mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # monotone field: (grad_gamma f, -grad_X f); the X move descends -f
    g_vec = objective_grad(pd, gamma) - phi_forward(pd, x_mat)
    g_mat = constraint_matrix(pd, gamma)
    return g_vec, g_mat


def eg_step(pd: ProblemData, v: IteratePair, cfg: EgConfig) -> IteratePair:
    """Two-stage projected extragradient update; the output matrix is PSD."""
    s = cfg.stepsize
    g_vec, g_mat = _field(pd, v.gamma, v.x_mat)
    gamma_half = v.gamma - s * g_vec
    x_half = proj_psd(v.x_mat - s * g_mat)
    g_vec, g_mat = _field(pd, gamma_half, x_half)
    return IteratePair(v.gamma - s * g_vec, proj_psd(v.x_mat - s * g_mat))
