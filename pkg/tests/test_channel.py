import numpy as np
import pytest

from macdfs.channel import (
    HermitianUnitary,
    MultiUnitary,
    PhasedProjectors,
    apply_channel,
    dfs_analyze,
    eigenspaces,
    kl_check,
    product_projector,
    schmidt_space_of_projector,
    theorem3_q7,
    uniqueness_scan,
)
from macdfs.linalg import ContractViolation
from macdfs.rankspace import MatrixSpace, Verdict, decide
from macdfs.instances import (
    EXAMPLES,
    planted_plus_model,
    phased_model,
    random_complex,
    random_projector,
    random_unitary,
    tri_unitary_model,
)
from macdfs.ket import parse_ket


def swap_matrix(d=3):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[d * j + i, d * i + j] = 1
    return s


def proj(*kets, d=3):
    vecs = np.column_stack([parse_ket(k, d).amps for k in kets])
    q, _ = np.linalg.qr(vecs)
    return q @ q.conj().T


def density(rng, d=3, rank=None):
    x = random_complex((d, rank or d), rng)
    rho = x @ x.conj().T
    return rho / np.trace(rho)


# -- models ---------------------------------------------------------------------

def test_hermitian_unitary_validation():
    with pytest.raises(ContractViolation):
        HermitianUnitary(np.diag([1, 1, 1, 2] + [1] * 5), 3)
    with pytest.raises(ContractViolation):
        HermitianUnitary(np.eye(9), 3, p=1.5)
    with pytest.raises(ContractViolation):
        HermitianUnitary(np.eye(4), 3)


def test_phased_validation(rng):
    p0 = random_projector(9, 5, rng)
    rest = np.eye(9) - p0
    with pytest.raises(ContractViolation):
        PhasedProjectors(p0, ((0.0, rest),), 3)
    with pytest.raises(ContractViolation):
        PhasedProjectors(p0, ((1.0, rest / 2),), 3)
    ok = PhasedProjectors(p0, ((1.0, rest),), 3)
    assert np.allclose(ok.u @ ok.u.conj().T, np.eye(9))


def test_multi_validation(rng):
    p0 = random_projector(9, 5, rng)
    with pytest.raises(ContractViolation):
        MultiUnitary(p0, (np.eye(9) - p0,), (1.0,), (1.0,), 3, p=0.7, q=0.5)


# -- channel action -------------------------------------------------------------

def test_channel_trivial_cases(rng):
    r1, r2 = density(rng), density(rng)
    model = HermitianUnitary(swap_matrix(), 3, p=1.0)
    assert np.allclose(apply_channel(model, r1, r2), np.kron(r1, r2))
    ident = HermitianUnitary(np.eye(9), 3, p=0.3)
    assert np.allclose(apply_channel(ident, r1, r2), np.kron(r1, r2))
    out = apply_channel(HermitianUnitary(swap_matrix(), 3, 0.4), r1, r2)
    assert abs(np.trace(out) - 1) < 1e-12


def test_channel_rejects_invalid_density(rng):
    model = HermitianUnitary(swap_matrix(), 3)
    with pytest.raises(ContractViolation):
        apply_channel(model, np.eye(3), np.eye(3) / 3)
    with pytest.raises(ContractViolation):
        apply_channel(model, np.diag([1.5, -0.5, 0]), np.eye(3) / 3)


def test_channel_leaves_code_states_alone(rng):
    model = EXAMPLES[2].model(p=0.3)
    rep = dfs_analyze(model, 2, 2)
    cert = rep.certificates[0]
    for _ in range(5):
        a = cert.r @ density(rng, 2) @ cert.r.conj().T
        b = cert.r_prime @ density(rng, 2) @ cert.r_prime.conj().T
        assert np.linalg.norm(apply_channel(model, a, b) - np.kron(a, b)) < 1e-10


# -- Knill-Laflamme -------------------------------------------------------------

def test_kl_single_identity():
    r = np.eye(3)[:, :2]
    alpha = kl_check([np.eye(9)], r, r)
    assert np.allclose(alpha, [[1]])


def test_kl_bi_unitary_alpha_matrix():
    p = 0.3
    model = EXAMPLES[2].model(p)
    r = np.eye(3)[:, 1:]
    alpha = kl_check([np.sqrt(p) * np.eye(9), np.sqrt(1 - p) * model.u], r, r)
    c = np.sqrt(p * (1 - p))
    assert np.allclose(alpha, [[p, c], [c, 1 - p]])


def test_kl_fails_for_random_subspace_under_swap(rng):
    u = swap_matrix()
    r, rp = random_unitary(3, rng)[:, :2], random_unitary(3, rng)[:, :2]
    assert kl_check([np.sqrt(0.5) * np.eye(9), np.sqrt(0.5) * u], r, rp) is None


def test_kl_rejects_non_isometry():
    with pytest.raises(ContractViolation):
        kl_check([np.eye(9)], 2 * np.eye(3)[:, :2], np.eye(3)[:, :2])


# -- eigenspaces and Schmidt spaces ----------------------------------------------

def test_eigenspaces_of_swap():
    e = eigenspaces(HermitianUnitary(swap_matrix(), 3))
    assert (e.p, e.q) == (6, 3)
    anti = proj("1/sqrt(2)(|01>-|10>)", "1/sqrt(2)(|12>-|21>)", "1/sqrt(2)(|02>-|20>)")
    assert np.allclose(e.q_proj, anti)


def test_eigenspaces_reflection_and_round_trip(rng):
    phi = random_complex(9, rng)
    phi /= np.linalg.norm(phi)
    e = eigenspaces(HermitianUnitary(np.eye(9) - 2 * np.outer(phi, phi.conj()), 3))
    assert np.allclose(e.q_proj, np.outer(phi, phi.conj()))
    q = random_projector(9, 4, rng)
    e = eigenspaces(HermitianUnitary.from_projector(q, 3))
    assert np.allclose(e.q_proj, q) and np.allclose(e.p_proj + e.q_proj, np.eye(9))


def test_schmidt_space_examples():
    anti = proj("1/sqrt(2)(|01>-|10>)", "1/sqrt(2)(|12>-|21>)", "1/sqrt(2)(|02>-|20>)")
    s = schmidt_space_of_projector(anti, 3)
    assert s.effective_dim == 3
    for m in s.basis:
        assert np.allclose(m, -m.T)
    s = schmidt_space_of_projector(proj("|00>"), 3)
    assert len(s) == 1 and abs(abs(s.basis[0][0, 0]) - 1) < 1e-12
    s = schmidt_space_of_projector(proj("|00>", "|01>", "|10>", "|11>"), 3)
    assert len(s) == 4
    assert np.allclose(np.sum(np.abs(s.basis) ** 2, axis=0), np.diag([1, 1, 0]) @ np.ones((3, 3)) @ np.diag([1, 1, 0]))


def test_schmidt_space_rejects_non_projector():
    with pytest.raises(ContractViolation):
        schmidt_space_of_projector(2 * np.eye(9), 3)


# -- product projectors -----------------------------------------------------------

def test_product_projector_examples():
    split = product_projector(proj("|00>", "|01>", "|10>", "|11>"), 3)
    assert split is not None
    p01 = np.diag([1, 1, 0])
    assert np.allclose(split[0], p01) and np.allclose(split[1], p01)
    q6 = proj("1/sqrt(2)(|00>+|11>)", "|20>", "|21>", "|22>")
    assert product_projector(q6, 3) is None
    a, b = product_projector(np.eye(9), 3)
    assert np.allclose(a, np.eye(3)) and np.allclose(b, np.eye(3))


def test_product_projector_random(rng):
    for _ in range(10):
        pa, pb = random_projector(3, 2, rng), random_projector(3, 1, rng)
        split = product_projector(np.kron(pa, pb), 3)
        assert np.allclose(split[0], pa) and np.allclose(split[1], pb)


# -- the pipeline -----------------------------------------------------------------

@pytest.mark.parametrize("ex", EXAMPLES, ids=lambda e: e.name)
def test_examples_through_the_pipeline(ex):
    rep = dfs_analyze(ex.model(), 2, 2)
    assert bool(rep.certificates) == ex.expect_code
    assert rep.verdict == (Verdict.EXISTS if ex.expect_code else Verdict.NOT_EXISTS)
    if ex.expect_code:
        cert = rep.certificates[0]
        assert cert.lam == ex.expect_lambda
        assert cert.residual <= 1e-10


def test_product_shortcut_agrees_with_decomposing_the_complement():
    model = EXAMPLES[4].model()
    rep = dfs_analyze(model, 2, 2)
    assert rep.branch(-1).layer == "product-projector"
    space = schmidt_space_of_projector((np.eye(9) + model.u) / 2, 3)
    assert decide(space, 1, 1).verdict == Verdict.EXISTS


def test_swap_has_no_code_and_reports_zero_patterns():
    rep = dfs_analyze(HermitianUnitary(swap_matrix(), 3), 2, 2)
    assert not rep.certificates
    plus = rep.branch(1)
    assert plus.details["shared_zero_rows"] == 0 and plus.details["shared_zero_columns"] == 0


def test_zero_row_labels_are_reported():
    rep = dfs_analyze(EXAMPLES[1].model(), 2, 2)
    plus = rep.branch(1)
    assert plus.details["shared_zero_rows"] == 1 and plus.details["shared_zero_columns"] == 0


def test_basis_independence(rng):
    for _ in range(5):
        model, _ = planted_plus_model(3, 2, 2, int(rng.integers(1, 6)), rng)
        q = (np.eye(9) - model.u) / 2
        w, v = np.linalg.eigh(q)
        vecs = v[:, w > 0.5]
        rot = vecs @ random_unitary(vecs.shape[1], rng)
        space_a = schmidt_space_of_projector(q, 3)
        space_b = MatrixSpace((3, 3), rot.T.reshape(-1, 3, 3))
        da, db = decide(space_a, 1, 1), decide(space_b, 1, 1)
        assert da.verdict == db.verdict == Verdict.EXISTS


def test_dimension_checks():
    with pytest.raises(ContractViolation):
        dfs_analyze(EXAMPLES[0].model(), 4, 1)


def test_q7_variant():
    plus = proj("1/sqrt(2)(|02>+|10>)", "1/sqrt(2)(|01>+|20>)")
    v = theorem3_q7(schmidt_space_of_projector(plus, 3))
    assert v.exists
    model = HermitianUnitary.from_projector(np.eye(9) - plus, 3)
    rep = dfs_analyze(model, 2, 2)
    assert rep.branch(-1).verdict == Verdict.EXISTS
    assert rep.branch(-1).certificate.lam == -1
    mirror = proj("1/sqrt(2)(|11>+|22>)", "1/sqrt(2)(|10>+|21>)")
    assert not theorem3_q7(schmidt_space_of_projector(mirror, 3)).exists
    full = proj("1/sqrt(3)(|00>+|11>+|22>)", "|01>")
    assert not theorem3_q7(schmidt_space_of_projector(full, 3)).exists
    with pytest.raises(ContractViolation):
        theorem3_q7(schmidt_space_of_projector(proj("|00>"), 3))


def test_phased_model_only_runs_plus_branch(rng):
    model = phased_model(rng, planted=True)
    rep = dfs_analyze(model, 2, 2)
    assert [b.lam for b in rep.branches] == [1]
    assert rep.verdict == Verdict.EXISTS
    shadow = dfs_analyze(model.hermitian_shadow(), 2, 2)
    assert shadow.branch(1).verdict == Verdict.EXISTS
    assert np.linalg.norm(rep.certificates[0].projector - shadow.branch(1).certificate.projector) < 1e-8


def test_two_phase_model_runs_both_branches(rng):
    p0 = random_projector(9, 5, rng)
    model = PhasedProjectors(p0, ((2.0, np.eye(9) - p0),), 3)
    rep = dfs_analyze(model, 2, 2)
    assert len(rep.branches) == 2


def test_tri_unitary_code_satisfies_all_conditions(rng):
    model = tri_unitary_model(rng)
    rep = dfs_analyze(model, 2, 2)
    cert = rep.certificates[0]
    pi = cert.projector
    u, v = model.u, model.v
    for op in (u, v, u.conj().T @ v):
        assert np.linalg.norm(pi @ op @ pi - pi) < 1e-8
    w = [np.sqrt(x) for x, _ in model.unitaries()]
    kraus = [wi * op for wi, (_, op) in zip(w, model.unitaries())]
    assert kl_check(kraus, cert.r, cert.r_prime) is not None


def test_uniqueness_scan_examples():
    rep = uniqueness_scan(EXAMPLES[2].model())
    assert rep.lambdas_with_codes == [1] and not rep.violation
    assert uniqueness_scan(HermitianUnitary(swap_matrix(), 3)).lambdas_with_codes == []
