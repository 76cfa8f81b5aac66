"""Finite-dimensional dual instance of the kernel OT problem.

Holds the quadratic data (Q, z, q^2), the feature rows of the Cholesky
factor of the pair-kernel Gram matrix, and the residual map whose roots
are exactly the KKT points of the constrained dual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from kot.kernels import (
    KernelSpec,
    SampleSet,
    embedding_norm_sq,
    gram_matrix,
    mean_embedding,
)
from kot.linalg import SpectralDecomp, cholesky_psd, sym_eig, symmetrize
from kot.psdcone import ProjJacobianCoeffs, apply_proj_jacobian, proj_from_decomp


@dataclass(frozen=True)
class FillingPoints:
    """Paired grid points at which the transport equality is sampled."""

    x_tilde: np.ndarray
    y_tilde: np.ndarray

    def __post_init__(self) -> None:
        x = np.atleast_2d(np.asarray(self.x_tilde, dtype=float))
        y = np.atleast_2d(np.asarray(self.y_tilde, dtype=float))
        if x.shape != y.shape or x.shape[0] < 1:
            raise ValueError("x_tilde and y_tilde must have equal shape (n, d), n >= 1")
        object.__setattr__(self, "x_tilde", x)
        object.__setattr__(self, "y_tilde", y)

    @property
    def count(self) -> int:
        return self.x_tilde.shape[0]


@dataclass
class IteratePair:
    """Solver state w = (gamma, X): a vector paired with a symmetric matrix.

    The pair norm is ||gamma||_2 + ||X||_F; the pair inner product is the
    usual product-space one.
    """

    gamma: np.ndarray
    x_mat: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.gamma) + np.linalg.norm(self.x_mat))

    def dot(self, other: "IteratePair") -> float:
        return float(
            self.gamma @ other.gamma + np.sum(self.x_mat * other.x_mat)
        )

    def copy(self) -> "IteratePair":
        return IteratePair(self.gamma.copy(), self.x_mat.copy())

    def __add__(self, other: "IteratePair") -> "IteratePair":
        return IteratePair(self.gamma + other.gamma, self.x_mat + other.x_mat)

    def __sub__(self, other: "IteratePair") -> "IteratePair":
        return IteratePair(self.gamma - other.gamma, self.x_mat - other.x_mat)

    def __mul__(self, c: float) -> "IteratePair":
        return IteratePair(c * self.gamma, c * self.x_mat)

    __rmul__ = __mul__

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.gamma)) and np.all(np.isfinite(self.x_mat)))


def zero_pair(n: int) -> IteratePair:
    return IteratePair(np.zeros(n), np.zeros((n, n)))


@dataclass
class ProblemData:
    """Assembled dual instance.

    ``chol_upper`` is the upper factor R with R.T R = K + jitter I; the
    i-th feature vector is the i-th row of R, so that the constrained
    matrix sum_i gamma_i phi_i phi_i^T equals R.T diag(gamma) R and at
    gamma = ones reconstructs the (jittered) pair-kernel Gram matrix.
    ``embed_sum`` stores the per-filling-pair embedding values needed by
    the OT estimate; z subtracts the quadratic cost penalty from it.
    """

    q_mat: np.ndarray
    z: np.ndarray
    q_sq: float
    chol_upper: np.ndarray
    lambda1: float
    lambda2: float
    embed_sum: np.ndarray | None = None
    filling: FillingPoints | None = None
    spec_x: KernelSpec | None = None
    spec_y: KernelSpec | None = None
    spec_xy: KernelSpec | None = None
    jitter: float = 0.0

    def __post_init__(self) -> None:
        self.q_mat = symmetrize(np.asarray(self.q_mat, dtype=float))
        self.z = np.asarray(self.z, dtype=float)
        self.chol_upper = np.asarray(self.chol_upper, dtype=float)
        n = self.q_mat.shape[0]
        if self.z.shape != (n,) or self.chol_upper.shape != (n, n):
            raise ValueError("inconsistent instance dimensions")
        if self.lambda1 <= 0.0 or self.lambda2 <= 0.0:
            raise ValueError("regularization parameters must be positive")

    @property
    def n(self) -> int:
        return self.z.shape[0]


def build_kernel_specs(dim: int, bandwidth_sq: float) -> tuple[KernelSpec, KernelSpec, KernelSpec]:
    """One bandwidth, three kernels: marginals on R^d, pairs on R^{2d}."""
    return (
        KernelSpec(bandwidth_sq=bandwidth_sq, input_dim=dim),
        KernelSpec(bandwidth_sq=bandwidth_sq, input_dim=dim),
        KernelSpec(bandwidth_sq=bandwidth_sq, input_dim=2 * dim),
    )


def assemble(
    samples_mu: SampleSet,
    samples_nu: SampleSet,
    filling: FillingPoints,
    lambda1: float,
    lambda2: float,
    spec_x: KernelSpec,
    spec_y: KernelSpec,
    spec_xy: KernelSpec,
) -> ProblemData:
    """Build the dual instance from samples and filling points."""
    if lambda1 <= 0.0 or lambda2 <= 0.0:
        raise ValueError("lambda1 and lambda2 must be positive")
    xt, yt = filling.x_tilde, filling.y_tilde
    q_mat = gram_matrix(spec_x, xt) + gram_matrix(spec_y, yt)
    embed = mean_embedding(spec_x, samples_mu, xt) + mean_embedding(spec_y, samples_nu, yt)
    cost = np.sum((xt - yt) ** 2, axis=1)
    z = embed - lambda2 * cost
    q_sq = embedding_norm_sq(spec_x, samples_mu) + embedding_norm_sq(spec_y, samples_nu)
    pair_gram = gram_matrix(spec_xy, np.hstack([xt, yt]))
    chol = cholesky_psd(pair_gram)
    return ProblemData(
        q_mat=q_mat,
        z=z,
        q_sq=q_sq,
        chol_upper=chol.upper,
        lambda1=lambda1,
        lambda2=lambda2,
        embed_sum=embed,
        filling=filling,
        spec_x=spec_x,
        spec_y=spec_y,
        spec_xy=spec_xy,
        jitter=chol.jitter_applied,
    )


def phi_forward(pd: ProblemData, x_mat: np.ndarray) -> np.ndarray:
    """Quadratic forms phi_i^T X phi_i without materializing outer products."""
    if x_mat.shape != (pd.n, pd.n):
        raise ValueError("matrix order mismatch")
    r = pd.chol_upper
    return np.einsum("ij,ij->i", r @ x_mat, r)


def phi_adjoint(pd: ProblemData, gamma: np.ndarray) -> np.ndarray:
    """Adjoint map sum_i gamma_i phi_i phi_i^T = R.T diag(gamma) R."""
    if gamma.shape != (pd.n,):
        raise ValueError("vector length mismatch")
    r = pd.chol_upper
    return symmetrize(r.T @ (gamma[:, None] * r))


def objective_grad(pd: ProblemData, gamma: np.ndarray) -> np.ndarray:
    return (pd.q_mat @ gamma - pd.z) / (2.0 * pd.lambda2)


def objective(pd: ProblemData, gamma: np.ndarray) -> float:
    """Dual quadratic objective value at gamma."""
    quad = float(gamma @ (pd.q_mat @ gamma)) / (4.0 * pd.lambda2)
    lin = float(gamma @ pd.z) / (2.0 * pd.lambda2)
    return quad - lin + pd.q_sq / (4.0 * pd.lambda2)


def constraint_matrix(pd: ProblemData, gamma: np.ndarray) -> np.ndarray:
    """The matrix whose positive semidefiniteness the dual constrains."""
    return phi_adjoint(pd, gamma) + pd.lambda1 * np.eye(pd.n)


def residual_parts(pd: ProblemData, w: IteratePair) -> tuple[IteratePair, SpectralDecomp]:
    """Residual map value and the eigendecomposition of its projection argument.

    The decomposition is reused by the Newton step, which needs the same
    spectral data; returning both avoids a second eigensolve per iteration.
    """
    r1 = objective_grad(pd, w.gamma) - phi_forward(pd, w.x_mat)
    z_arg = symmetrize(w.x_mat) - constraint_matrix(pd, w.gamma)
    decomp = sym_eig(z_arg)
    r2 = w.x_mat - proj_from_decomp(decomp)
    return IteratePair(r1, r2), decomp


def residual(pd: ProblemData, w: IteratePair) -> IteratePair:
    """Nonsmooth KKT residual; zero exactly at dual optima."""
    return residual_parts(pd, w)[0]


def apply_jacobian(
    pd: ProblemData, coeffs: ProjJacobianCoeffs, mu: float, dw: IteratePair
) -> IteratePair:
    """Apply the regularized generalized Jacobian at the current iterate.

    The projection-Jacobian coefficients must come from the decomposition
    of X - (adjoint(gamma) + lambda1 I) at the iterate the residual was
    evaluated at.
    """
    top = objective_grad_dir(pd, dw.gamma) + mu * dw.gamma - phi_forward(pd, dw.x_mat)
    bottom = (
        apply_proj_jacobian(coeffs, phi_adjoint(pd, dw.gamma) - dw.x_mat)
        + (1.0 + mu) * dw.x_mat
    )
    return IteratePair(top, bottom)


def objective_grad_dir(pd: ProblemData, dgamma: np.ndarray) -> np.ndarray:
    """Directional derivative of the objective gradient (the Q/2lambda2 part)."""
    return (pd.q_mat @ dgamma) / (2.0 * pd.lambda2)


def ot_estimate(pd: ProblemData, gamma_hat: np.ndarray) -> float:
    """Kernel OT estimate from a dual solution.

    Uses the raw embedding sums, not z (which folds in the cost penalty).
    """
    if pd.embed_sum is None:
        raise ValueError("instance carries no embedding sums; assemble() provides them")
    return (pd.q_sq - float(gamma_hat @ pd.embed_sum)) / (2.0 * pd.lambda2)


def evaluate_map(
    pd: ProblemData,
    samples_mu: SampleSet,
    gamma_hat: np.ndarray,
    queries: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Dual potential u and transport map T = id - grad(u) at query points.

    The potential follows from stationarity of the sampled Lagrangian in
    the source potential; its gradient is analytic for the Gaussian kernel.
    Returns (u values (m,), mapped points (m, d)).
    """
    if pd.filling is None or pd.spec_x is None:
        raise ValueError("instance carries no filling points / kernel specs")
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != pd.spec_x.input_dim:
        raise ValueError("query dimension mismatch")
    two_l2 = 2.0 * pd.lambda2
    sig_sq = pd.spec_x.bandwidth_sq
    xs = samples_mu.points
    xt = pd.filling.x_tilde
    g_s = gram_matrix(pd.spec_x, xs, queries)
    g_f = gram_matrix(pd.spec_x, xt, queries)
    emb = g_s.mean(axis=0)
    weighted = gamma_hat @ g_f
    u = (emb - weighted) / two_l2
    # grad k(a, x) wrt x is k(a, x) (a - x) / sig_sq
    part_s = (g_s.T @ xs) / xs.shape[0] - emb[:, None] * queries
    part_f = g_f.T @ (gamma_hat[:, None] * xt) - weighted[:, None] * queries
    grad_u = (part_s - part_f) / (two_l2 * sig_sq)
    return u, queries - grad_u


def potential_and_map(
    pd: ProblemData,
    samples_mu: SampleSet,
    gamma_hat: np.ndarray,
    query: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Single-point convenience wrapper around :func:`evaluate_map`."""
    u, t = evaluate_map(pd, samples_mu, gamma_hat, np.atleast_2d(query))
    return float(u[0]), t[0]
