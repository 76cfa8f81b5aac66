"""Regularized semismooth Newton direction for the dual residual system.

The regularized Newton system on the (vector, matrix) pair is reduced to a
single n-by-n SPD solve through a block elimination built from the
spectral structure of the PSD projection; the small system is solved
matrix-free by conjugate gradient.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from kot.linalg import SpectralDecomp, cg_solve
from kot.problem import (
    IteratePair,
    ProblemData,
    apply_jacobian,
    objective_grad_dir,
    phi_adjoint,
    phi_forward,
    residual_parts,
)
from kot.psdcone import (
    NewtonEliminator,
    ProjJacobianCoeffs,
    apply_eliminator,
    make_eliminator,
    proj_jacobian_coeffs,
)


@dataclass(frozen=True)
class NewtonConfig:
    """Constants of the Newton step: acceptance test, damping update, CG budget.

    ``tau`` and ``kappa`` gate the inexact-direction acceptance; the alpha
    thresholds and beta factors drive the three-branch damping update with
    ``theta`` clamped to [theta_min, theta_max]. ``cg_tol`` overrides the
    derived inner tolerance when set (used by oracle tests that need a
    near-exact solve).
    """

    tau: float = 0.5
    kappa: float = 0.1
    alpha1: float = 1e-6
    alpha2: float = 1.0
    beta0: float = 0.5
    beta1: float = 1.2
    beta2: float = 5.0
    theta_min: float = 1e-4
    theta_max: float = 1e4
    theta0: float = 1.0
    cg_max: int = 20
    cg_restarts: int = 2
    cg_tol: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.tau < 1.0 and 0.0 < self.kappa < 1.0):
            raise ValueError("tau and kappa must lie in (0, 1)")
        if not (0.0 < self.alpha1 <= self.alpha2):
            raise ValueError("need 0 < alpha1 <= alpha2")
        if not (self.beta0 < 1.0 < self.beta2):
            raise ValueError("need beta0 < 1 < beta2")
        if not (0.0 < self.theta_min <= self.theta_max):
            raise ValueError("need 0 < theta_min <= theta_max")
        if self.cg_max < 1 or self.cg_restarts < 0:
            raise ValueError("invalid CG budget")


@dataclass(frozen=True)
class NewtonContext:
    """Per-iteration spectral objects at the current iterate."""

    decomp: SpectralDecomp
    coeffs: ProjJacobianCoeffs
    eliminator: NewtonEliminator
    mu: float
    theta: float


@dataclass(frozen=True)
class NewtonStep:
    dw: IteratePair
    cg_iters: int
    criterion_met: bool
    crit_lhs: float
    crit_rhs: float
    cg_ms: float


def newton_context(decomp: SpectralDecomp, res_norm: float, theta: float) -> NewtonContext:
    """Derive the damping and spectral operators from a residual evaluation."""
    if res_norm <= 0.0:
        raise ValueError("context requires a nonzero residual")
    mu = theta * res_norm
    coeffs = proj_jacobian_coeffs(decomp)
    return NewtonContext(
        decomp=decomp,
        coeffs=coeffs,
        eliminator=make_eliminator(coeffs, mu),
        mu=mu,
        theta=theta,
    )


def newton_context_at(pd: ProblemData, w: IteratePair, theta: float) -> NewtonContext:
    """Convenience: evaluate the residual at ``w`` and build its context."""
    r, decomp = residual_parts(pd, w)
    return newton_context(decomp, r.norm(), theta)


def middle_operator(
    pd: ProblemData, elim: NewtonEliminator, mu: float
) -> Callable[[np.ndarray], np.ndarray]:
    """SPD operator of the reduced n-by-n system: Q/(2 l2) + mu I + Phi T Phi*."""

    def apply(v: np.ndarray) -> np.ndarray:
        return (
            objective_grad_dir(pd, v)
            + mu * v
            + phi_forward(pd, apply_eliminator(elim, phi_adjoint(pd, v)))
        )

    return apply


def _criterion(
    pd: ProblemData,
    ctx: NewtonContext,
    r: IteratePair,
    dw: IteratePair,
    cfg: NewtonConfig,
    res_norm: float,
) -> tuple[bool, float, float]:
    lhs = (apply_jacobian(pd, ctx.coeffs, ctx.mu, dw) + r).norm()
    rhs = cfg.tau * min(1.0, cfg.kappa * res_norm * dw.norm())
    return lhs <= rhs, lhs, rhs


def newton_direction(
    pd: ProblemData, r: IteratePair, ctx: NewtonContext, cfg: NewtonConfig
) -> NewtonStep:
    """Inexact damped Newton direction through the block-eliminated solve.

    The reduced right-hand side folds the matrix-block residual into the
    vector block; CG is retried with a tenfold tighter tolerance up to
    ``cg_restarts`` times if the acceptance inequality fails, and the final
    flag reports whether it ultimately held (callers fall back on the
    safeguard sequence when it does not).
    """
    elim = ctx.eliminator
    mu = ctx.mu
    res_norm = r.norm()
    if res_norm <= 0.0:
        raise ValueError("direction requires a nonzero residual")

    filt_r2 = r.x_mat + apply_eliminator(elim, r.x_mat)
    a1 = -r.gamma - phi_forward(pd, filt_r2) / (mu + 1.0)
    a2_tilde = -filt_r2 / (mu + 1.0)

    op = middle_operator(pd, elim, mu)
    rel_tol = cfg.cg_tol if cfg.cg_tol is not None else cfg.tau * min(1.0, cfg.kappa * res_norm)
    a1_norm = float(np.linalg.norm(a1))

    sol = np.zeros_like(a1)
    total_iters = 0
    met, lhs, rhs = False, np.inf, 0.0
    cg_t0 = time.perf_counter()
    for attempt in range(cfg.cg_restarts + 1):
        rhs_vec = a1 - op(sol) if attempt else a1
        rhs_norm = float(np.linalg.norm(rhs_vec))
        if rhs_norm > 0.0 and a1_norm > 0.0:
            # keep the attempt tolerance relative to the original rhs
            attempt_tol = rel_tol * a1_norm / rhs_norm
            corr, iters, _ = cg_solve(op, rhs_vec, attempt_tol, cfg.cg_max)
            sol = sol + corr
            total_iters += iters
        cg_ms = (time.perf_counter() - cg_t0) * 1e3
        dw = IteratePair(sol, a2_tilde - apply_eliminator(elim, phi_adjoint(pd, sol)))
        met, lhs, rhs = _criterion(pd, ctx, r, dw, cfg, res_norm)
        if met:
            break
        rel_tol /= 10.0
    return NewtonStep(
        dw=dw,
        cg_iters=total_iters,
        criterion_met=met,
        crit_lhs=lhs,
        crit_rhs=rhs,
        cg_ms=cg_ms,
    )


def theta_update(theta: float, rho: float, dw_norm_sq: float, cfg: NewtonConfig) -> float:
    """Three-branch damping update driven by the decrease measure rho.

    A large rho relative to the squared step length signals a good
    direction (shrink theta); a negative or tiny one signals a poor
    direction (grow it). All branches are clamped to the configured range.
    """
    if rho >= cfg.alpha2 * dw_norm_sq:
        new = max(cfg.theta_min, cfg.beta0 * theta)
    elif rho >= cfg.alpha1 * dw_norm_sq:
        new = cfg.beta1 * theta
    else:
        new = min(cfg.theta_max, cfg.beta2 * theta)
    return float(np.clip(new, cfg.theta_min, cfg.theta_max))
