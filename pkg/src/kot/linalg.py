"""Dense symmetric linear algebra primitives.

Eigendecomposition with a deterministic ordering, Cholesky factorization
with an escalating jitter policy for nearly-singular kernel matrices, and
a matrix-free conjugate gradient solver for SPD operators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg


class EigenSolveError(RuntimeError):
    """Raised when the symmetric eigensolver fails to converge."""


class IndefiniteKernelError(RuntimeError):
    """Raised when a kernel matrix cannot be factored even at the jitter cap."""


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the symmetric part (a + a.T) / 2."""
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.

    ``pos_idx`` holds the indices of strictly positive eigenvalues (a prefix
    of ``range(n)`` given the descending order); ``nonpos_idx`` the rest.
    """

    eigvecs: np.ndarray
    eigvals: np.ndarray
    pos_idx: np.ndarray
    nonpos_idx: np.ndarray

    @property
    def order(self) -> int:
        return self.eigvals.shape[0]

    @property
    def n_pos(self) -> int:
        return self.pos_idx.shape[0]


@dataclass(frozen=True)
class CholeskyFactor:
    """Upper-triangular factor R with R.T @ R = input + jitter_applied * I."""

    upper: np.ndarray
    jitter_applied: float


def sym_eig(z: np.ndarray) -> SpectralDecomp:
    """Eigendecompose a symmetric matrix with deterministic descending order.

    Ties are broken by the ascending position in the raw LAPACK output, so
    the positive/nonpositive index split is reproducible run to run.
    """
    zs = symmetrize(np.asarray(z, dtype=float))
    try:
        vals, vecs = np.linalg.eigh(zs)
    except np.linalg.LinAlgError as err:
        raise EigenSolveError(
            f"eigendecomposition failed for matrix with Frobenius norm "
            f"{np.linalg.norm(zs):.6e}"
        ) from err
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    n_pos = int(np.count_nonzero(vals > 0.0))
    return SpectralDecomp(
        eigvecs=vecs,
        eigvals=vals,
        pos_idx=np.arange(n_pos),
        nonpos_idx=np.arange(n_pos, vals.shape[0]),
    )


# Jitter ladder: 0, then 1e-10 * tr(K)/n escalating tenfold up to 1e-6 * tr(K)/n.
_JITTER_START = 1e-10
_JITTER_CAP = 1e-6


def cholesky_psd(k: np.ndarray) -> CholeskyFactor:
    """Upper Cholesky factor of a nearly-PSD matrix, adding jitter if needed.

    Kernel Gram matrices are often numerically rank deficient; a diagonal
    shift growing from ``1e-10 * tr(K)/n`` by factors of ten (capped at
    ``1e-6 * tr(K)/n``) is applied until the factorization succeeds.
    """
    ks = symmetrize(np.asarray(k, dtype=float))
    n = ks.shape[0]
    scale = np.trace(ks) / n
    jitters = [0.0]
    level = _JITTER_START
    while level <= _JITTER_CAP * (1 + 1e-12):
        jitters.append(level * scale)
        level *= 10.0
    for jitter in jitters:
        try:
            upper = scipy.linalg.cholesky(
                ks + jitter * np.eye(n), lower=False, check_finite=False
            )
        except scipy.linalg.LinAlgError:
            continue
        return CholeskyFactor(upper=upper, jitter_applied=jitter)
    raise IndefiniteKernelError("kernel matrix numerically indefinite")


def cg_solve(
    apply: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, int, float]:
    """Conjugate gradient for an SPD operator given as a matvec callable.

    Stops once ``||rhs - A x|| <= tol * ||rhs||`` or after ``max_iter``
    matvecs; stagnation is left to the caller to detect via the returned
    final residual. NaN or Inf in the iterates is a hard error.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    rhs = np.asarray(rhs, dtype=float)
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rhs_norm = float(np.linalg.norm(rhs))
    target = tol * rhs_norm
    res = rhs_norm
    if res <= target:
        return x, 0, res
    p = r.copy()
    rr = float(r @ r)
    iters = 0
    for iters in range(1, max_iter + 1):
        ap = apply(p)
        pap = float(p @ ap)
        if not np.isfinite(pap):
            raise FloatingPointError("non-finite curvature in conjugate gradient")
        if pap <= 0.0:
            # p has collapsed to numerical zero on an SPD operator
            iters -= 1
            break
        alpha = rr / pap
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r))
        if not np.isfinite(res):
            raise FloatingPointError("non-finite residual in conjugate gradient")
        if res <= target:
            return x, iters, res
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, iters, res
