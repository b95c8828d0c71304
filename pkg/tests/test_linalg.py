import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macdfs.linalg import (
    ContractViolation,
    det_pencil_coefficients,
    generalized_schur,
    hermitian_eig,
    kernel,
    left_kernel,
    numerical_rank,
    svd,
    tolerance,
    get_tolerance,
)
from macdfs.instances import random_complex, random_unitary

from conftest import E


def test_svd_identity_has_unit_singular_values():
    res = svd(np.eye(3))
    assert np.allclose(res.singular_values, [1, 1, 1])


def test_svd_diagonal_sorts_values():
    res = svd(np.diag([0.0, 0.5, 2.0]))
    assert np.allclose(res.singular_values, [2.0, 0.5, 0.0])
    assert np.allclose(res.left @ np.diag(res.singular_values) @ res.right.conj().T, np.diag([0, 0.5, 2.0]))


def test_svd_returns_full_unitaries(rng):
    m = random_complex((4, 2), rng)
    res = svd(m)
    assert res.left.shape == (4, 4) and res.right.shape == (2, 2)
    recon = res.left[:, :2] @ np.diag(res.singular_values) @ res.right.conj().T
    assert np.linalg.norm(recon - m) < 1e-12 * res.singular_values[0]


def test_numerical_rank_examples():
    assert numerical_rank(E(0, 0)) == 1
    assert numerical_rank(np.eye(3) / np.sqrt(3)) == 3
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_numerical_rank_respects_relative_threshold():
    m = np.diag([1.0, 1e-8, 1e-11])
    assert numerical_rank(m) == 2
    assert numerical_rank(m, tol_rel=1e-7) == 1
    with tolerance(rank_rel=1e-12):
        assert numerical_rank(m) == 3
    assert get_tolerance().rank_rel == 1e-9


def test_numerical_rank_rejects_nonpositive_tolerance():
    with pytest.raises(ContractViolation):
        numerical_rank(np.eye(2), tol_rel=0)


def test_hermitian_eig_of_reflection():
    m = np.eye(4) - 2 * np.diag([1, 0, 0, 0])
    w, v = hermitian_eig(m)
    assert np.allclose(w, [-1, 1, 1, 1])
    assert np.allclose(v.conj().T @ v, np.eye(4))


def test_hermitian_eig_of_swap_has_six_plus_three_minus():
    swap = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            swap[3 * j + i, 3 * i + j] = 1
    w, _ = hermitian_eig(swap)
    assert np.sum(np.isclose(w, 1)) == 6 and np.sum(np.isclose(w, -1)) == 3


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(ContractViolation):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_kernel_examples(rng):
    k = kernel(E(1, 1))
    assert k.shape == (3, 2)
    assert np.allclose(np.abs(k[1]), 0)
    assert kernel(random_complex((3, 3), rng)).shape == (3, 0)
    stacked = random_complex((6, 2), rng) @ random_complex((2, 3), rng)
    k = kernel(stacked)
    assert k.shape == (3, 1) and np.linalg.norm(stacked @ k) < 1e-12 * np.linalg.norm(stacked)


def test_left_kernel_annihilates_from_the_left(rng):
    m = random_complex((4, 2), rng)
    lk = left_kernel(m)
    assert lk.shape == (2, 4)
    assert np.linalg.norm(lk @ m) < 1e-12
    assert np.allclose(lk @ lk.conj().T, np.eye(2))


def test_det_pencil_coefficients_match_direct_expansion():
    a = np.diag([1.0, 2.0, 3.0])
    b = np.eye(3)
    # det(a - g I) = (1-g)(2-g)(3-g) = 6 - 11 g + 6 g^2 - g^3
    assert np.allclose(det_pencil_coefficients(a, b), [6, -11, 6, -1])


def test_generalized_schur_trivial_pairs():
    res = generalized_schur(np.eye(3), np.eye(3))
    assert np.allclose(res.ta, np.eye(3)) and np.allclose(res.tb, np.eye(3))
    d1, d2 = np.diag([1.0, 2, 3]), np.diag([4.0, 5, 6])
    res = generalized_schur(d1, d2)
    assert np.max(np.abs(np.tril(res.ta, -1))) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_generalized_schur_random_pairs(n, rng):
    for _ in range(5):
        a, b = random_complex((n, n), rng), random_complex((n, n), rng)
        res = generalized_schur(a, b)
        scale = np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
        assert np.linalg.norm(res.u @ a @ res.v - res.ta) <= 1e-10 * scale
        assert np.linalg.norm(res.u @ b @ res.v - res.tb) <= 1e-10 * scale
        assert np.max(np.abs(np.tril(res.ta, -1)), initial=0) <= 1e-10 * scale
        assert np.max(np.abs(np.tril(res.tb, -1)), initial=0) <= 1e-10 * scale
        assert np.allclose(res.u @ res.u.conj().T, np.eye(n))


def test_generalized_schur_singular_pencil(rng):
    x = random_complex((4, 2), rng)
    a = x @ random_complex((2, 4), rng)
    b = x @ random_complex((2, 4), rng)
    res = generalized_schur(a, b)
    scale = np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
    assert np.max(np.abs(np.tril(res.ta, -1))) <= 1e-10 * scale
    assert np.max(np.abs(np.tril(res.tb, -1))) <= 1e-10 * scale


def test_generalized_schur_is_deterministic(rng):
    a, b = random_complex((4, 4), rng), random_complex((4, 4), rng)
    r1, r2 = generalized_schur(a, b), generalized_schur(a, b)
    assert np.array_equal(r1.u, r2.u) and np.array_equal(r1.v, r2.v)


cmat = st.integers(2, 6).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, 2**32 - 1))
)


@settings(max_examples=60, deadline=None)
@given(cmat)
def test_rank_is_invariant_under_unitary_equivalence(args):
    n, seed = args
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, n + 1))
    m = random_complex((n, r), rng) @ random_complex((r, n), rng)
    u, v = random_unitary(n, rng), random_unitary(n, rng)
    assert numerical_rank(m) == r
    assert numerical_rank(m.conj().T) == r
    assert numerical_rank(u @ m @ v) == r
