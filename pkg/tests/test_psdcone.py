import numpy as np
import pytest

from conftest import random_symmetric, symmetric_with_signs
from kot.linalg import sym_eig
from kot.psdcone import (
    NONPOS_COMPLEMENT,
    POS_BLOCK,
    apply_eliminator,
    apply_proj_jacobian,
    eliminator_coeff_matrix,
    jacobian_coeff_matrix,
    make_eliminator,
    proj_jacobian_coeffs,
    proj_psd,
)


def coeffs_of(z):
    return proj_jacobian_coeffs(sym_eig(z))


def test_proj_diagonal():
    assert np.allclose(proj_psd(np.diag([3.0, -2.0])), np.diag([3.0, 0.0]))


def test_proj_negative_identity_is_zero():
    assert np.allclose(proj_psd(-np.eye(4)), 0.0)


def test_proj_optimality_conditions():
    rng = np.random.default_rng(5)
    z = random_symmetric(rng, 5)
    p = proj_psd(z)
    # complementarity and PSD-ness characterize the Frobenius projection
    assert abs(np.sum((z - p) * p)) <= 1e-8 * np.linalg.norm(z) ** 2
    assert np.linalg.eigvalsh(p).min() >= -1e-10 * np.linalg.norm(z)
    assert np.linalg.eigvalsh(z - p).max() <= 1e-10 * np.linalg.norm(z)


def test_proj_idempotent_and_identity_on_psd():
    rng = np.random.default_rng(8)
    a = rng.standard_normal((4, 4))
    psd = a @ a.T
    assert np.allclose(proj_psd(psd), psd, atol=1e-10)
    z = random_symmetric(rng, 4)
    assert np.allclose(proj_psd(proj_psd(z)), proj_psd(z), atol=1e-10)


def test_jacobian_coeffs_formula():
    c = coeffs_of(np.diag([2.0, -1.0]))
    assert c.cross.shape == (1, 1)
    assert np.isclose(c.cross[0, 0], 2.0 / 3.0)


def test_jacobian_coeffs_zero_eigenvalue_boundary():
    c = coeffs_of(np.diag([1.0, 0.0]))
    assert np.isclose(c.cross[0, 0], 1.0)


def test_jacobian_coeffs_all_positive():
    c = coeffs_of(np.diag([2.0, 1.0]))
    assert c.cross.size == 0
    assert np.allclose(jacobian_coeff_matrix(c), 1.0)


def test_jacobian_coeffs_in_unit_interval():
    rng = np.random.default_rng(11)
    for _ in range(10):
        c = coeffs_of(random_symmetric(rng, 6))
        if c.cross.size:
            assert np.all(c.cross > 0.0)
            assert np.all(c.cross <= 1.0)


def test_apply_proj_jacobian_hand_case():
    c = coeffs_of(np.diag([2.0, -1.0]))
    out = apply_proj_jacobian(c, np.ones((2, 2)))
    assert np.allclose(out, [[1.0, 2.0 / 3.0], [2.0 / 3.0, 0.0]])


def test_apply_proj_jacobian_definite_limits():
    rng = np.random.default_rng(2)
    s = random_symmetric(rng, 4)
    a = rng.standard_normal((4, 4))
    assert np.allclose(apply_proj_jacobian(coeffs_of(a @ a.T + np.eye(4)), s), s)
    assert np.allclose(apply_proj_jacobian(coeffs_of(-a @ a.T - np.eye(4)), s), 0.0)


def test_apply_proj_jacobian_matches_finite_difference():
    rng = np.random.default_rng(21)
    z = symmetric_with_signs(rng, 6, 3)
    s = random_symmetric(rng, 6)
    h = 1e-6
    fd = (proj_psd(z + h * s) - proj_psd(z)) / h
    an = apply_proj_jacobian(coeffs_of(z), s)
    assert np.linalg.norm(fd - an) <= 1e-5 * np.linalg.norm(an)


def test_apply_proj_jacobian_contraction():
    rng = np.random.default_rng(4)
    for _ in range(5):
        z = random_symmetric(rng, 5)
        s = random_symmetric(rng, 5)
        out = apply_proj_jacobian(coeffs_of(z), s)
        assert np.linalg.norm(out) <= np.linalg.norm(s) * (1 + 1e-12)


def test_proj_strong_semismoothness_remainder():
    # second-order remainder stays quadratically bounded as the perturbation shrinks
    rng = np.random.default_rng(17)
    z = symmetric_with_signs(rng, 6, 2)
    dz = random_symmetric(rng, 6)
    dz /= np.linalg.norm(dz)
    ratios = []
    for eps in (1e-2, 1e-3, 1e-4):
        step = eps * dz
        rem = proj_psd(z + step) - proj_psd(z) - apply_proj_jacobian(coeffs_of(z + step), step)
        ratios.append(np.linalg.norm(rem) / eps**2)
    assert max(ratios) <= 10.0 * max(min(ratios), 1e-6)


def test_eliminator_hand_case():
    c = coeffs_of(np.diag([2.0, -1.0]))
    op = make_eliminator(c, mu=1.0)
    assert np.isclose(op.cross_scaled[0, 0], 0.5)
    out = apply_eliminator(op, np.ones((2, 2)))
    assert np.allclose(out, [[1.0, 0.5], [0.5, 0.0]])


def test_eliminator_zero_when_no_positive_part():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    op = make_eliminator(coeffs_of(-a @ a.T - np.eye(4)), mu=0.7)
    s = random_symmetric(rng, 4)
    assert np.allclose(apply_eliminator(op, s), 0.0)


def test_eliminator_scaled_identity_when_all_positive():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((4, 4))
    op = make_eliminator(coeffs_of(a @ a.T + np.eye(4)), mu=2.0)
    assert op.path == NONPOS_COMPLEMENT
    s = random_symmetric(rng, 4)
    assert np.allclose(apply_eliminator(op, s), s / 2.0)


def _direct_eliminator(op, s):
    p = op.coeffs.decomp.eigvecs
    return p @ (eliminator_coeff_matrix(op) * (p.T @ s @ p)) @ p.T


def _flip_path(op):
    from dataclasses import replace

    flipped = NONPOS_COMPLEMENT if op.path == POS_BLOCK else POS_BLOCK
    return replace(op, path=flipped)


@pytest.mark.parametrize("n_pos", [0, 1, 3, 5, 6])
def test_eliminator_paths_agree(n_pos):
    rng = np.random.default_rng(100 + n_pos)
    n = 6
    z = symmetric_with_signs(rng, n, n_pos) if 0 < n_pos < n else (
        np.eye(n) if n_pos == n else -np.eye(n)
    )
    c = coeffs_of(z)
    s = random_symmetric(rng, n)
    for mu in (0.03, 1.0, 17.0):
        op = make_eliminator(c, mu)
        direct = _direct_eliminator(op, s)
        assert np.linalg.norm(apply_eliminator(op, s) - direct) <= 1e-10 * max(
            np.linalg.norm(direct), 1.0
        )
        # force the other path and check it agrees too
        other = _flip_path(op)
        assert np.linalg.norm(apply_eliminator(other, s) - direct) <= 1e-10 * max(
            np.linalg.norm(direct), 1.0
        )


def test_eliminator_path_selection_rule():
    rng = np.random.default_rng(9)
    z_few_pos = symmetric_with_signs(rng, 6, 2)
    z_many_pos = symmetric_with_signs(rng, 6, 5)
    assert make_eliminator(coeffs_of(z_few_pos), 1.0).path == POS_BLOCK
    assert make_eliminator(coeffs_of(z_many_pos), 1.0).path == NONPOS_COMPLEMENT


def test_eliminator_scaled_coeff_range():
    rng = np.random.default_rng(31)
    z = symmetric_with_signs(rng, 6, 3)
    for mu in (0.1, 1.0, 10.0):
        op = make_eliminator(coeffs_of(z), mu)
        assert np.all(op.cross_scaled > 0.0)
        assert np.all(op.cross_scaled <= 1.0 / mu + 1e-15)


def test_eliminator_self_adjoint():
    rng = np.random.default_rng(23)
    z = symmetric_with_signs(rng, 6, 4)
    op = make_eliminator(coeffs_of(z), 0.4)
    s1 = random_symmetric(rng, 6)
    s2 = random_symmetric(rng, 6)
    lhs = np.sum(apply_eliminator(op, s1) * s2)
    rhs = np.sum(s1 * apply_eliminator(op, s2))
    assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_dimension_mismatch_raises():
    c = coeffs_of(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        apply_proj_jacobian(c, np.ones((3, 3)))
    with pytest.raises(ValueError):
        apply_eliminator(make_eliminator(c, 1.0), np.ones((3, 3)))
