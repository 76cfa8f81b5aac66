"""Projection onto the PSD cone and the spectral operators derived from it.

The projection's generalized Jacobian acts as a Hadamard filter in the
eigenbasis of the projected matrix. The same spectral structure yields the
elimination operator used to reduce the regularized Newton system to an
n-by-n solve; it has two application paths whose costs scale with the
number of positive or nonpositive eigenvalues respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kot.linalg import SpectralDecomp, sym_eig, symmetrize

POS_BLOCK = "pos_block"
NONPOS_COMPLEMENT = "nonpos_complement"


@dataclass(frozen=True)
class ProjJacobianCoeffs:
    """Spectral coefficients of the projection's generalized Jacobian.

    ``cross[i, j]`` couples the i-th positive to the j-th nonpositive
    eigendirection and always lies in (0, 1]; the positive-positive block
    is implicitly all ones and the nonpositive-nonpositive block zero.
    """

    decomp: SpectralDecomp
    cross: np.ndarray


@dataclass(frozen=True)
class NewtonEliminator:
    """Spectral operator eliminating the matrix block of the Newton system.

    Applies M ((mu+1) I - M)^{-1} where M is the projection Jacobian at the
    same decomposition; ``cross_scaled`` entries lie in (0, 1/mu]. ``path``
    selects the cheap application route: ``POS_BLOCK`` costs
    O(n_pos * n^2) and is used when positive eigenvalues are the minority,
    ``NONPOS_COMPLEMENT`` costs O(n_nonpos * n^2) otherwise.
    """

    coeffs: ProjJacobianCoeffs
    mu: float
    cross_scaled: np.ndarray
    path: str


def proj_from_decomp(decomp: SpectralDecomp) -> np.ndarray:
    """PSD projection reconstructed from a precomputed eigendecomposition."""
    k = decomp.n_pos
    n = decomp.order
    if k == 0:
        return np.zeros((n, n))
    p_pos = decomp.eigvecs[:, :k]
    return symmetrize((p_pos * decomp.eigvals[:k]) @ p_pos.T)


def proj_psd(z: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix to symmetric ``z``."""
    return proj_from_decomp(sym_eig(z))


def proj_jacobian_coeffs(decomp: SpectralDecomp) -> ProjJacobianCoeffs:
    """Coefficients of the projection's directional derivative at ``decomp``.

    The cross coefficients are s_i / (s_i - s_j) over positive s_i and
    nonpositive s_j; the denominator is structurally positive.
    """
    k = decomp.n_pos
    pos = decomp.eigvals[:k]
    nonpos = decomp.eigvals[k:]
    denom = pos[:, None] - nonpos[None, :]
    if denom.size and not np.all(denom > 0.0):
        raise AssertionError("eigenvalue gap between sign groups must be positive")
    cross = pos[:, None] / denom if denom.size else np.zeros((k, decomp.order - k))
    return ProjJacobianCoeffs(decomp=decomp, cross=cross)


def jacobian_coeff_matrix(coeffs: ProjJacobianCoeffs) -> np.ndarray:
    """Full n-by-n Hadamard coefficient matrix of the projection Jacobian."""
    n = coeffs.decomp.order
    k = coeffs.decomp.n_pos
    w = np.zeros((n, n))
    w[:k, :k] = 1.0
    w[:k, k:] = coeffs.cross
    w[k:, :k] = coeffs.cross.T
    return w


def apply_proj_jacobian(coeffs: ProjJacobianCoeffs, s: np.ndarray) -> np.ndarray:
    """Directional derivative of the PSD projection applied to ``s``."""
    p = coeffs.decomp.eigvecs
    n = coeffs.decomp.order
    if s.shape != (n, n):
        raise ValueError(f"expected matrix of order {n}, got shape {s.shape}")
    return p @ (jacobian_coeff_matrix(coeffs) * (p.T @ s @ p)) @ p.T


def make_eliminator(coeffs: ProjJacobianCoeffs, mu: float) -> NewtonEliminator:
    if mu <= 0.0:
        raise ValueError("regularization mu must be positive")
    cross_scaled = coeffs.cross / (mu + 1.0 - coeffs.cross)
    k = coeffs.decomp.n_pos
    n = coeffs.decomp.order
    path = POS_BLOCK if k <= n - k else NONPOS_COMPLEMENT
    return NewtonEliminator(coeffs=coeffs, mu=mu, cross_scaled=cross_scaled, path=path)


def eliminator_coeff_matrix(op: NewtonEliminator) -> np.ndarray:
    """Full Hadamard coefficient matrix of the eliminator (reference path)."""
    n = op.coeffs.decomp.order
    k = op.coeffs.decomp.n_pos
    w = np.zeros((n, n))
    w[:k, :k] = 1.0 / op.mu
    w[:k, k:] = op.cross_scaled
    w[k:, :k] = op.cross_scaled.T
    return w


def apply_eliminator(op: NewtonEliminator, s: np.ndarray) -> np.ndarray:
    """Apply the eliminator to ``s`` along the cheap low-rank path.

    Both paths agree with the dense Hadamard formula; they differ only in
    which eigenvector block is swept over.
    """
    decomp = op.coeffs.decomp
    n = decomp.order
    if s.shape != (n, n):
        raise ValueError(f"expected matrix of order {n}, got shape {s.shape}")
    k = decomp.n_pos
    p_pos = decomp.eigvecs[:, :k]
    p_non = decomp.eigvecs[:, k:]
    if op.path == POS_BLOCK:
        u = p_pos.T @ s
        g = p_pos @ (
            ((u @ p_pos) / (2.0 * op.mu)) @ p_pos.T
            + (op.cross_scaled * (u @ p_non)) @ p_non.T
        )
        return g + g.T
    # Complement route: subtract the filtered remainder from s / mu.
    rem_cross = 1.0 / op.mu - op.cross_scaled
    v = p_non.T @ s
    h = p_non @ (
        ((v @ p_non) / (2.0 * op.mu)) @ p_non.T
        + (rem_cross.T * (v @ p_pos)) @ p_pos.T
    )
    return s / op.mu - (h + h.T)
