"""Main solve loop: extragradient-safeguarded regularized semismooth Newton.

Each iteration advances the safeguard sequence by one extragradient step
and the main sequence by one damped Newton step, keeps whichever
candidate has the smaller residual norm, and adapts the damping from the
observed decrease. Termination is on the residual norm.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from kot.eg import EgConfig, eg_step
from kot.newton import NewtonConfig, newton_context, newton_direction, theta_update
from kot.problem import IteratePair, ProblemData, ot_estimate, residual_parts, zero_pair

log = logging.getLogger("kot.solver")

CONVERGED = "converged"
MAX_ITER = "max_iter"


class SolverNumericsError(RuntimeError):
    """Non-finite residual encountered; carries the trace up to the failure."""

    def __init__(self, message: str, trace: list["IterationRecord"]):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    eg: EgConfig = field(default_factory=EgConfig)
    residual_tol: float = 0.005
    max_iter: int = 500
    seed: int = 0
    safeguard_every: int = 1

    def __post_init__(self) -> None:
        if self.residual_tol <= 0.0:
            raise ValueError("residual_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.safeguard_every < 1:
            raise ValueError("safeguard_every must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    """One row of the solve trace; times in milliseconds."""

    iteration: int
    res_accepted: float
    res_ssn: float
    res_eg: float
    accepted: str
    theta: float
    mu: float
    cg_iters: int
    criterion_met: bool
    crit_lhs: float
    crit_rhs: float
    eg_ms: float
    newton_ms: float
    cg_ms: float
    resid_ms: float
    step_ms: float


@dataclass(frozen=True)
class IterationProbe:
    """Raw per-iteration objects handed to an observer callback."""

    iteration: int
    w: IteratePair
    r: IteratePair
    mu: float
    theta: float
    dw: IteratePair
    criterion_met: bool


@dataclass
class SolverReport:
    gamma_hat: np.ndarray
    x_hat: np.ndarray
    ot_estimate: float | None
    residual_norm: float
    termination: str
    trace: list[IterationRecord]
    total_ms: float

    @property
    def iterations(self) -> int:
        return len(self.trace)


def initial_point(pd: ProblemData) -> IteratePair:
    """The all-zero pair; feasible for the matrix block and closed-form residual."""
    return zero_pair(pd.n)


def _check_finite(res_norm: float, pair: IteratePair, trace: list[IterationRecord]) -> None:
    if not (np.isfinite(res_norm) and pair.is_finite()):
        raise SolverNumericsError("non-finite residual in solver iterate", trace)


def solve(
    pd: ProblemData,
    cfg: SolverConfig | None = None,
    on_iteration: Callable[[IterationProbe], None] | None = None,
) -> SolverReport:
    """Run the safeguarded Newton loop from the zero pair.

    The accepted iterate always satisfies res(w_k) <= res(v_k) against the
    safeguard sequence. Hitting ``max_iter`` is a normal termination state
    reported as such, not an error.
    """
    cfg = cfg or SolverConfig()
    t_start = time.perf_counter()
    trace: list[IterationRecord] = []

    w = initial_point(pd)
    v = w.copy()
    r_w, decomp = residual_parts(pd, w)
    res_w = r_w.norm()
    res_v = res_w
    _check_finite(res_w, r_w, trace)
    theta = cfg.newton.theta0

    termination = MAX_ITER
    if res_w <= cfg.residual_tol:
        termination = CONVERGED

    k = 0
    while termination != CONVERGED and k < cfg.max_iter:
        t_iter = time.perf_counter()

        # safeguard step
        eg_ms = 0.0
        resid_ms = 0.0
        if k % cfg.safeguard_every == 0:
            t0 = time.perf_counter()
            v = eg_step(pd, v, cfg.eg)
            eg_ms = (time.perf_counter() - t0) * 1e3
            t0 = time.perf_counter()
            r_v, decomp_v = residual_parts(pd, v)
            resid_ms += (time.perf_counter() - t0) * 1e3
            res_v = r_v.norm()
            _check_finite(res_v, r_v, trace)

        # Newton step at the current accepted iterate
        t0 = time.perf_counter()
        ctx = newton_context(decomp, res_w, theta)
        step = newton_direction(pd, r_w, ctx, cfg.newton)
        newton_ms = (time.perf_counter() - t0) * 1e3
        w_trial = w + step.dw
        t0 = time.perf_counter()
        r_trial, decomp_trial = residual_parts(pd, w_trial)
        resid_ms += (time.perf_counter() - t0) * 1e3
        res_trial = r_trial.norm()
        _check_finite(res_trial, r_trial, trace)

        if on_iteration is not None:
            on_iteration(
                IterationProbe(
                    iteration=k,
                    w=w,
                    r=r_w,
                    mu=ctx.mu,
                    theta=theta,
                    dw=step.dw,
                    criterion_met=step.criterion_met,
                )
            )

        # damping update from the trial point, whether or not it is kept
        rho = -r_trial.dot(step.dw)
        theta_next = theta_update(theta, rho, step.dw.norm() ** 2, cfg.newton)

        if res_trial <= res_v:
            accepted = "ssn"
            w, r_w, decomp, res_w = w_trial, r_trial, decomp_trial, res_trial
        else:
            accepted = "eg"
            w, r_w, decomp, res_w = v.copy(), r_v, decomp_v, res_v

        step_ms = (time.perf_counter() - t_iter) * 1e3
        trace.append(
            IterationRecord(
                iteration=k,
                res_accepted=res_w,
                res_ssn=res_trial,
                res_eg=res_v,
                accepted=accepted,
                theta=theta,
                mu=ctx.mu,
                cg_iters=step.cg_iters,
                criterion_met=step.criterion_met,
                crit_lhs=step.crit_lhs,
                crit_rhs=step.crit_rhs,
                eg_ms=eg_ms,
                newton_ms=newton_ms,
                cg_ms=step.cg_ms,
                resid_ms=resid_ms,
                step_ms=step_ms,
            )
        )
        log.debug(
            "iter %d accepted=%s res=%.3e (ssn %.3e, eg %.3e) theta=%.2e cg=%d",
            k, accepted, res_w, res_trial, res_v, theta, step.cg_iters,
        )
        theta = theta_next
        k += 1
        if res_w <= cfg.residual_tol:
            termination = CONVERGED

    est = ot_estimate(pd, w.gamma) if pd.embed_sum is not None else None
    return SolverReport(
        gamma_hat=w.gamma,
        x_hat=w.x_mat,
        ot_estimate=est,
        residual_norm=res_w,
        termination=termination,
        trace=trace,
        total_ms=(time.perf_counter() - t_start) * 1e3,
    )


def solve_pure_eg(pd: ProblemData, cfg: SolverConfig | None = None) -> SolverReport:
    """Baseline: iterate the extragradient step alone to the residual tolerance."""
    cfg = cfg or SolverConfig()
    t_start = time.perf_counter()
    trace: list[IterationRecord] = []
    v = initial_point(pd)
    r_v, _ = residual_parts(pd, v)
    res_v = r_v.norm()
    _check_finite(res_v, r_v, trace)
    termination = CONVERGED if res_v <= cfg.residual_tol else MAX_ITER
    k = 0
    while termination != CONVERGED and k < cfg.max_iter:
        t_iter = time.perf_counter()
        t0 = time.perf_counter()
        v = eg_step(pd, v, cfg.eg)
        eg_ms = (time.perf_counter() - t0) * 1e3
        t0 = time.perf_counter()
        r_v, _ = residual_parts(pd, v)
        resid_ms = (time.perf_counter() - t0) * 1e3
        res_v = r_v.norm()
        _check_finite(res_v, r_v, trace)
        trace.append(
            IterationRecord(
                iteration=k,
                res_accepted=res_v,
                res_ssn=float("nan"),
                res_eg=res_v,
                accepted="eg",
                theta=float("nan"),
                mu=float("nan"),
                cg_iters=0,
                criterion_met=False,
                crit_lhs=float("nan"),
                crit_rhs=float("nan"),
                eg_ms=eg_ms,
                newton_ms=0.0,
                cg_ms=0.0,
                resid_ms=resid_ms,
                step_ms=(time.perf_counter() - t_iter) * 1e3,
            )
        )
        k += 1
        if res_v <= cfg.residual_tol:
            termination = CONVERGED
    est = ot_estimate(pd, v.gamma) if pd.embed_sum is not None else None
    return SolverReport(
        gamma_hat=v.gamma,
        x_hat=v.x_mat,
        ot_estimate=est,
        residual_norm=res_v,
        termination=termination,
        trace=trace,
        total_ms=(time.perf_counter() - t_start) * 1e3,
    )
