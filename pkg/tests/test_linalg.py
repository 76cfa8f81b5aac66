import numpy as np
import pytest

from kot.linalg import (
    IndefiniteKernelError,
    cg_solve,
    cholesky_psd,
    sym_eig,
    symmetrize,
)


def test_sym_eig_diagonal():
    d = sym_eig(np.diag([2.0, -1.0]))
    assert np.allclose(np.abs(d.eigvecs), np.eye(2))
    assert np.allclose(d.eigvals, [2.0, -1.0])
    assert d.pos_idx.tolist() == [0]
    assert d.nonpos_idx.tolist() == [1]


def test_sym_eig_identity():
    d = sym_eig(np.eye(3))
    assert np.allclose(d.eigvals, 1.0)
    assert d.pos_idx.tolist() == [0, 1, 2]
    assert d.nonpos_idx.size == 0


def test_sym_eig_reconstructs_random():
    rng = np.random.default_rng(7)
    z = symmetrize(rng.standard_normal((6, 6)))
    d = sym_eig(z)
    recon = (d.eigvecs * d.eigvals) @ d.eigvecs.T
    assert np.linalg.norm(recon - z) <= 1e-10 * np.linalg.norm(z)
    assert np.linalg.norm(d.eigvecs.T @ d.eigvecs - np.eye(6)) <= 1e-10
    # reference solver on the same matrix agrees on the spectrum
    ref = np.sort(np.linalg.eigvalsh(z))[::-1]
    assert np.allclose(d.eigvals, ref, atol=1e-12)


def test_sym_eig_descending_and_zero_goes_nonpos():
    d = sym_eig(np.diag([0.0, 1.0, -2.0]))
    assert d.eigvals.tolist() == [1.0, 0.0, -2.0]
    assert d.pos_idx.tolist() == [0]
    assert d.nonpos_idx.tolist() == [1, 2]


def test_cholesky_identity_no_jitter():
    f = cholesky_psd(np.eye(2))
    assert np.allclose(f.upper, np.eye(2))
    assert f.jitter_applied == 0.0


def test_cholesky_hand_checked_2x2():
    f = cholesky_psd(np.array([[4.0, 2.0], [2.0, 2.0]]))
    assert np.allclose(f.upper, [[2.0, 1.0], [0.0, 1.0]])


def test_cholesky_rank_deficient_gram_gets_jitter():
    # Gram matrix of duplicated points is exactly rank deficient
    v = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.5, 0.1, -1.0]])
    k = v @ v.T
    f = cholesky_psd(k)
    assert f.jitter_applied > 0.0
    recon = f.upper.T @ f.upper
    target = k + f.jitter_applied * np.eye(3)
    assert np.linalg.norm(recon - target) <= 1e-8 * np.linalg.norm(target)


def test_cholesky_nonneg_diagonal():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 5))
    f = cholesky_psd(a @ a.T)
    assert np.all(np.diag(f.upper) >= 0.0)


def test_cholesky_indefinite_rejected():
    with pytest.raises(IndefiniteKernelError):
        cholesky_psd(np.diag([1.0, -1.0]))


def test_cg_identity_one_iteration():
    b = np.array([1.0, -2.0, 3.0])
    x, iters, res = cg_solve(lambda v: v, b, tol=1e-12, max_iter=10)
    assert np.allclose(x, b)
    assert iters == 1


def test_cg_diagonal_exact_in_n():
    d = np.arange(1.0, 6.0)
    x, iters, res = cg_solve(lambda v: d * v, np.ones(5), tol=1e-14, max_iter=5)
    assert np.allclose(x, 1.0 / d)
    assert iters <= 5


def test_cg_matches_dense_solve():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((8, 8))
    m = a.T @ a + np.eye(8)
    b = rng.standard_normal(8)
    x, _, _ = cg_solve(lambda v: m @ v, b, tol=1e-14, max_iter=200)
    assert np.linalg.norm(x - np.linalg.solve(m, b)) <= 1e-10


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cg_finite_termination_property(seed):
    # with tol 0 the method must still reach near-exact residual within n steps
    rng = np.random.default_rng(seed)
    n = 12
    a = rng.standard_normal((n, n))
    m = a.T @ a + 0.5 * np.eye(n)
    b = rng.standard_normal(n)
    _, iters, res = cg_solve(lambda v: m @ v, b, tol=0.0, max_iter=n)
    assert iters <= n
    assert res <= 1e-8 * np.linalg.norm(b)


def test_cg_nan_is_hard_error():
    def bad(v):
        return np.full_like(v, np.nan)

    with pytest.raises(FloatingPointError):
        cg_solve(bad, np.ones(3), tol=1e-10, max_iter=5)


def test_cg_max_iter_validated():
    with pytest.raises(ValueError):
        cg_solve(lambda v: v, np.ones(2), tol=1e-10, max_iter=0)
