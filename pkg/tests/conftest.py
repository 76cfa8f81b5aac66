"""Shared fixtures: random well-conditioned instances and analytic scalar fixtures."""

import numpy as np
import pytest

from kot.problem import ProblemData


def random_problem(
    seed: int,
    n: int = 5,
    q_reg: float = 0.5,
    feat_reg: float = 0.5,
    z_scale: float = 2.0,
    lambda1: float = 0.5,
    lambda2: float = 0.4,
) -> ProblemData:
    """Dense random instance with well-conditioned quadratic and feature data."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    q = a @ a.T / n + q_reg * np.eye(n)
    b = rng.standard_normal((n, n))
    r_up = np.linalg.cholesky(b @ b.T / n + feat_reg * np.eye(n)).T
    return ProblemData(
        q_mat=q,
        z=z_scale * rng.standard_normal(n),
        q_sq=float(rng.uniform(0.0, 1.0)),
        chol_upper=r_up,
        lambda1=lambda1,
        lambda2=lambda2,
    )


@pytest.fixture
def scalar_interior() -> ProblemData:
    """1-by-1 instance whose unconstrained minimizer z/Q = 0.5 is feasible."""
    return ProblemData(
        q_mat=[[2.0]], z=[1.0], q_sq=0.0, chol_upper=[[1.0]], lambda1=1.0, lambda2=0.5
    )


@pytest.fixture
def scalar_active() -> ProblemData:
    """1-by-1 instance with the constraint active: gamma = -1, dual X = 2."""
    return ProblemData(
        q_mat=[[2.0]], z=[-4.0], q_sq=0.0, chol_upper=[[1.0]], lambda1=1.0, lambda2=0.5
    )


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = scale * rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def symmetric_with_signs(
    rng: np.random.Generator, n: int, n_pos: int, gap: float = 0.1
) -> np.ndarray:
    """Symmetric matrix with n_pos positive eigenvalues and pairwise gaps >= gap."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    pos = 0.5 + gap * np.arange(n_pos) + rng.uniform(0, 0.05, size=n_pos)
    neg = -0.5 - gap * np.arange(n - n_pos) - rng.uniform(0, 0.05, size=n - n_pos)
    vals = np.concatenate([pos, neg])
    return (q * vals) @ q.T
