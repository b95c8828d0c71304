import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macdfs.linalg import ContractViolation
from macdfs.oracle import SearchBudget
from macdfs.rankspace import (
    MatrixSpace,
    Verdict,
    block_residual,
    common_cokernel,
    common_kernel,
    decide,
    decompose,
    is_k_subspace,
    max_rank,
    necessary_rank_bound,
    pencil_max_rank,
    rank1_in_pencil,
)
from macdfs.linalg import numerical_rank
from macdfs.instances import random_complex, random_unitary

from conftest import E

S2 = 1 / np.sqrt(2)
ZERO_ROW = MatrixSpace.from_matrices([(E(1, 1) + E(2, 2)) * S2, (E(1, 0) + E(2, 1)) * S2])
CROSS = MatrixSpace.from_matrices([(E(0, 2) + E(1, 0)) * S2, (E(0, 1) + E(2, 0)) * S2])
SKEW = MatrixSpace.from_matrices([E(0, 1) - E(1, 0), E(0, 2) - E(2, 0), E(1, 2) - E(2, 1)])


def sp(*mats):
    return MatrixSpace.from_matrices(mats)


# -- space container -----------------------------------------------------------

def test_space_drops_zero_matrices_and_counts_effective_dim():
    s = sp(E(0, 0), np.zeros((3, 3)), 2 * E(0, 0), E(1, 1))
    assert len(s) == 3
    assert s.effective_dim == 2
    assert len(s.orthonormal()) == 2


def test_space_rejects_mixed_shapes():
    with pytest.raises(ContractViolation):
        MatrixSpace((3, 3), np.zeros((2, 2, 3)))


# -- max rank -------------------------------------------------------------------

def test_max_rank_examples():
    assert max_rank(ZERO_ROW) == 2
    assert max_rank(SKEW) == 2
    assert max_rank(sp(np.eye(3))) == 3
    assert max_rank(MatrixSpace((3, 3), np.zeros((0, 3, 3)))) == 0


def test_max_rank_pencil_exact_vs_sampled(rng):
    for _ in range(20):
        x = random_complex((3, 2), rng)
        mats = [x @ random_complex((2, 3), rng) for _ in range(4)]
        s = sp(*mats)
        assert max_rank(s) == 2
        assert pencil_max_rank(mats[0], mats[1]) == 2


def test_pencil_max_rank_detects_sum_of_rank_ones():
    # each member has rank 1 but the span reaches rank 2
    assert pencil_max_rank(E(0, 0), E(1, 1)) == 2
    assert pencil_max_rank(E(0, 0), E(0, 1)) == 1


# -- k-subspaces ----------------------------------------------------------------

def test_is_k_subspace_examples():
    assert is_k_subspace(CROSS, 2)
    assert not is_k_subspace(sp(E(0, 0), E(1, 1)), 2)
    assert is_k_subspace(SKEW, 2)
    assert is_k_subspace(sp(E(0, 0), E(0, 1)), 1)
    assert not is_k_subspace(sp(np.eye(3), E(0, 0)), 3)


def test_is_k_subspace_needs_nonzero_space():
    with pytest.raises(ContractViolation):
        is_k_subspace(MatrixSpace((3, 3), np.zeros((0, 3, 3))), 2)


def test_rank_one_member_examples():
    assert abs(rank1_in_pencil(E(0, 0), E(1, 1))) < 1e-12
    assert rank1_in_pencil(*CROSS.basis) is None
    g = rank1_in_pencil(np.zeros((3, 3)), E(1, 1))
    member = E(1, 1) if g == math.inf else -g * E(1, 1)
    assert numerical_rank(member) == 1


def test_rank_one_member_planted(rng):
    for _ in range(20):
        base = random_complex((3, 2), rng) @ random_complex((2, 3), rng)
        rank_one = np.outer(random_complex(3, rng), random_complex(3, rng))
        gamma = complex(random_complex(1, rng)[0])
        c2 = base
        c1 = rank_one + gamma * base
        g = rank1_in_pencil(c1, c2)
        assert g is not None
        assert numerical_rank(c1 - g * c2, tol_rel=1e-7) <= 1
        assert abs(g - gamma) < 1e-6


def test_rank_one_member_rejects_zero_pair():
    with pytest.raises(ContractViolation):
        rank1_in_pencil(np.zeros((3, 3)), np.zeros((3, 3)))


# -- common kernels -------------------------------------------------------------

def test_common_kernel_examples():
    assert common_kernel(ZERO_ROW).shape[1] == 0
    ck = common_cokernel(ZERO_ROW)
    assert ck.shape[1] == 1 and abs(abs(ck[0, 0]) - 1) < 1e-12
    assert common_kernel(sp(np.eye(3))).shape[1] == 0
    assert common_cokernel(sp(np.eye(3))).shape[1] == 0
    k = common_kernel(sp(E(0, 1), E(0, 2)))
    assert k.shape[1] == 1 and abs(abs(k[0, 0]) - 1) < 1e-12
    assert common_cokernel(sp(E(0, 1), E(0, 2))).shape[1] == 2


# -- necessary bound ------------------------------------------------------------

def test_necessary_bound_examples():
    assert not necessary_rank_bound(sp(np.eye(3) / np.sqrt(3)), 2, 2)
    assert necessary_rank_bound(sp(np.eye(3)), 1, 1)
    assert necessary_rank_bound(CROSS, 2, 2)


# -- decisions ------------------------------------------------------------------

def _check_cert(space, cert, M, N):
    assert cert.u1.shape == (M, space.d) and cert.v2.shape == (space.d, N)
    assert np.allclose(cert.u1 @ cert.u1.conj().T, np.eye(M), atol=1e-10)
    assert np.allclose(cert.v2.conj().T @ cert.v2, np.eye(N), atol=1e-10)
    assert block_residual(space, cert.u1, cert.v2) <= 1e-8


def test_decompose_cross_pair_space_gives_the_middle_code():
    cert = decompose(CROSS, 1, 1)
    _check_cert(CROSS, cert, 2, 2)
    r = cert.u1.conj().T
    assert np.allclose(r @ r.conj().T, np.diag([0, 1, 1]), atol=1e-12)


def test_decompose_skew_space_fails():
    dec = decide(SKEW, 1, 1)
    assert dec.verdict == Verdict.NOT_EXISTS and dec.certificate is None


def test_decompose_two_diagonal_units():
    s = sp(E(0, 0), E(1, 1))
    cert = decompose(s, 1, 1)
    _check_cert(s, cert, 2, 2)
    # the rows {0, 2} / columns {1, 2} block is one valid answer
    rows, cols = np.eye(3)[[0, 2]], np.eye(3)[:, [1, 2]]
    assert block_residual(s, rows, cols) == 0


def test_decide_layers():
    eye = np.eye(3)
    assert decide(sp(eye), 3, 0).layer == "trivial"
    assert decide(sp(eye / np.sqrt(3)), 1, 1).layer == "necessary-bound"
    assert decide(sp(E(0, 1), E(0, 2)), 0, 2).layer == "common-kernel"
    assert decide(sp(E(0, 1), E(0, 2)), 0, 1).layer == "common-kernel-exhausted"
    assert decide(ZERO_ROW, 2, 0).layer == "common-cokernel"
    assert decide(sp(np.diag([1, 2, 0])), 1, 1).layer == "single-matrix-svd"


def test_decide_rejects_bad_shape():
    with pytest.raises(ContractViolation):
        decide(CROSS, 4, 0)


def test_both_row_and_column_type_blocks_are_detected():
    # a (2,0)-shaped block: one shared zero row, a 1x3 block
    assert decide(ZERO_ROW, 2, 0).verdict == Verdict.EXISTS
    # no shared zero column
    assert decide(ZERO_ROW, 0, 2).verdict == Verdict.NOT_EXISTS


def test_generalized_schur_route_d4(rng):
    mats = [random_complex((4, 4), rng) for _ in range(2)]
    s = sp(*mats)
    dec = decide(s, 2, 2)
    assert dec.layer == "generalized-schur"
    _check_cert(s, dec.certificate, 2, 2)


def test_dimension_count_route(rng):
    mats = [random_complex((5, 5), rng) for _ in range(4)]
    s = sp(*mats)
    dec = decide(s, 4, 4)
    assert dec.layer == "dimension-count"
    _check_cert(s, dec.certificate, 1, 1)


def test_search_layer_for_three_matrices_in_four_dimensions(rng):
    # planted 2x1 block at d=4, q=3: not covered by exact layers
    u, v = random_unitary(4, rng), random_unitary(4, rng)
    mats = []
    for _ in range(3):
        m = random_complex((4, 4), rng)
        m[:2, :1] = 0
        mats.append(u @ m @ v)
    s = sp(*mats)
    dec = decide(s, 2, 3, SearchBudget(restarts=64))
    assert dec.verdict == Verdict.EXISTS and dec.layer == "search"
    _check_cert(s, dec.certificate, 2, 1)


def test_kernel_span_route_finds_planted_block(rng):
    for q in (3, 4, 5):
        u, v = random_unitary(3, rng), random_unitary(3, rng)
        mats = []
        for _ in range(q):
            m = random_complex((3, 3), rng)
            m[:2, :2] = 0
            mats.append(u @ m @ v)
        s = sp(*mats)
        dec = decide(s, 1, 1)
        if dec.layer in ("kernel-span",):
            _check_cert(s, dec.certificate, 2, 2)
        assert dec.verdict == Verdict.EXISTS


def test_larger_two_subspaces_are_two_decomposable(rng):
    # spaces inside {zero first row} or {zero 2x2 block} with dim 4..6
    for dim in (4, 5, 6):
        basis = []
        for _ in range(dim):
            m = random_complex((3, 3), rng)
            m[0] = 0
            basis.append(m)
        s = sp(*basis)
        assert max_rank(s) == 2
        verdicts = [decide(s, t, u).verdict for t, u in ((2, 0), (0, 2), (1, 1))]
        assert Verdict.EXISTS in verdicts


# -- properties -----------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_equivalence_invariance(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 6))
    planted = bool(rng.integers(2))
    mats = []
    for _ in range(q):
        m = random_complex((3, 3), rng)
        if planted:
            m[:2, :2] = 0
        mats.append(m)
    e, f = random_complex((3, 3), rng), random_complex((3, 3), rng)
    a = decide(sp(*mats), 1, 1).verdict
    b = decide(sp(*[e @ m @ f for m in mats]), 1, 1).verdict
    assert a == b
    if planted:
        assert a == Verdict.EXISTS


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_certificate_zeroes_every_combination(seed):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(3, rng), random_unitary(3, rng)
    mats = []
    for _ in range(int(rng.integers(1, 5))):
        m = random_complex((3, 3), rng)
        m[:2, :2] = 0
        mats.append(u @ m @ v)
    s = sp(*mats)
    cert = decompose(s, 1, 1)
    for _ in range(5):
        c = s.random_element(rng)
        assert np.linalg.norm(cert.u1 @ c @ cert.v2) <= 1e-8 * s.max_norm


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_stacked_rank_form_of_certificates(seed):
    rng = np.random.default_rng(seed)
    u, v = random_unitary(3, rng), random_unitary(3, rng)
    mats = []
    for _ in range(int(rng.integers(1, 5))):
        m = random_complex((3, 3), rng)
        m[:2, :2] = 0
        mats.append(u @ m @ v)
    cert = decompose(sp(*mats), 1, 1)
    stacked = np.vstack([cert.u1 @ m for m in mats])
    assert numerical_rank(stacked, tol_rel=1e-8) <= 3 - 2
