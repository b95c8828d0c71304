"""Random-unitary noise on two senders and the product decoherence-free
subspace pipeline built on top of :mod:`macdfs.rankspace`.

A product code ``R (x) R'`` is decoherence free for a unitary ``U`` exactly
when it sits inside one eigenspace ``E`` of ``U``, i.e. when every state of
``E``'s orthogonal complement has a vanishing ``M x N`` block
``<r_a r'_b | phi> = (R^H C_phi conj(R'))_ab``.  That turns the question into
a common-zero-block problem for the Schmidt matrices spanning the complement.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .linalg import ContractViolation, NumericalFailure, as_cmat, get_tolerance, hermitian_eig, is_unitary
from .oracle import SearchBudget, verify_certificate
from .pencil import PencilVerdict, theorem3_2x2
from .rankspace import Verdict, common_cokernel, common_kernel, decide, max_rank
from .space import MatrixSpace

__all__ = [
    "HermitianUnitary",
    "PhasedProjectors",
    "MultiUnitary",
    "CodeCertificate",
    "BranchReport",
    "DfsReport",
    "apply_channel",
    "kl_check",
    "eigenspaces",
    "schmidt_space_of_projector",
    "product_projector",
    "dfs_analyze",
    "theorem3_2x2",
    "theorem3_q7",
    "uniqueness_scan",
    "projector_onto",
]

_CHECK = 1e-10
_PHASE_TOL = 1e-9


def projector_onto(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of the given columns."""
    v = as_cmat(vectors)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    r = int(np.count_nonzero(s > get_tolerance().rank_rel * max(s[0], 1e-300))) if s.size else 0
    u = u[:, :r]
    return u @ u.conj().T


def _check_projector(p: np.ndarray, n: int, what: str) -> np.ndarray:
    p = as_cmat(p)
    if p.shape != (n, n):
        raise ContractViolation(f"{what} must be {n}x{n}, got {p.shape}")
    if np.linalg.norm(p - p.conj().T) > _CHECK * max(1.0, np.linalg.norm(p)):
        raise ContractViolation(f"{what} is not hermitian")
    if np.linalg.norm(p @ p - p) > 1e-8 * max(1.0, np.linalg.norm(p)):
        raise ContractViolation(f"{what} is not idempotent")
    return (p + p.conj().T) / 2


def _rank_of_projector(p: np.ndarray) -> int:
    return int(round(float(np.real(np.trace(p)))))


def _check_weight(p: float, name: str = "p"):
    if not (0.0 <= p <= 1.0):
        raise ContractViolation(f"weight {name} = {p} outside [0, 1]")


# -- noise models ---------------------------------------------------------------

@dataclass(frozen=True)
class HermitianUnitary:
    """``rho -> p rho + (1 - p) U rho U^H`` with ``U = P - Q`` hermitian and unitary."""

    u: np.ndarray = field(repr=False)
    d: int
    p: float = 0.5

    def __post_init__(self):
        u = as_cmat(self.u)
        n = self.d * self.d
        if u.shape != (n, n):
            raise ContractViolation(f"U must be {n}x{n} for local dimension {self.d}")
        if np.linalg.norm(u - u.conj().T, 2) > _CHECK * max(1.0, np.linalg.norm(u, 2)):
            raise ContractViolation("U is not hermitian")
        if np.linalg.norm(u @ u - np.eye(n), 2) > _CHECK:
            raise ContractViolation("U is not unitary (U^2 != I)")
        _check_weight(self.p)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_projector(cls, q, d: int, p: float = 0.5) -> "HermitianUnitary":
        q = _check_projector(q, d * d, "Q")
        return cls(np.eye(d * d) - 2 * q, d, p)

    @classmethod
    def from_states(cls, states: Sequence, d: int, p: float = 0.5) -> "HermitianUnitary":
        """Noise whose -1 eigenspace is the span of the given amplitude vectors."""
        vecs = np.column_stack([np.asarray(getattr(s, "amps", s), complex).ravel() for s in states])
        return cls.from_projector(projector_onto(vecs), d, p)

    def unitaries(self) -> list[tuple[float, np.ndarray]]:
        return [(self.p, np.eye(self.d**2, dtype=complex)), (1 - self.p, self.u)]

    def eigen_decomposition(self) -> list[tuple[complex, np.ndarray]]:
        e = eigenspaces(self)
        return [(1.0 + 0j, e.p_proj), (-1.0 + 0j, e.q_proj)]

    def kl_operators(self, lam) -> list[tuple[str, np.ndarray, complex]]:
        return [("U", self.u, complex(lam))]

    def default_lambdas(self) -> list[complex]:
        return [1.0 + 0j, -1.0 + 0j]


@dataclass(frozen=True)
class PhasedProjectors:
    """``U = P0 + sum_k exp(i delta_k) P_k`` for orthogonal projectors summing to I."""

    p0: np.ndarray = field(repr=False)
    blocks: tuple = field(repr=False)  # ((delta, projector), ...)
    d: int
    p: float = 0.5

    def __post_init__(self):
        n = self.d * self.d
        p0 = _check_projector(self.p0, n, "P0")
        blocks = []
        for delta, proj in self.blocks:
            delta = float(delta) % (2 * np.pi)
            if min(delta, 2 * np.pi - delta) < _PHASE_TOL:
                raise ContractViolation("a zero phase belongs to P0, not to a separate block")
            blocks.append((delta, _check_projector(proj, n, "P_k")))
        total = p0 + sum(b for _, b in blocks)
        if np.linalg.norm(total - np.eye(n)) > 1e-8:
            raise ContractViolation("projectors do not sum to the identity")
        projs = [p0] + [b for _, b in blocks]
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.linalg.norm(projs[i] @ projs[j]) > 1e-8:
                    raise ContractViolation("projectors are not mutually orthogonal")
        _check_weight(self.p)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def u(self) -> np.ndarray:
        return self.p0 + sum(np.exp(1j * dl) * b for dl, b in self.blocks)

    def unitaries(self):
        return [(self.p, np.eye(self.d**2, dtype=complex)), (1 - self.p, self.u)]

    def eigen_decomposition(self) -> list[tuple[complex, np.ndarray]]:
        groups: list[tuple[float, np.ndarray]] = [(0.0, self.p0)]
        for dl, b in self.blocks:
            for i, (g, proj) in enumerate(groups):
                if abs(np.exp(1j * g) - np.exp(1j * dl)) < _PHASE_TOL:
                    groups[i] = (g, proj + b)
                    break
            else:
                groups.append((dl, b))
        return [(complex(np.exp(1j * g)) if g else 1.0 + 0j, proj) for g, proj in groups]

    def distinct_phases(self) -> int:
        return len(self.eigen_decomposition())

    def kl_operators(self, lam):
        return [("U", self.u, complex(lam))]

    def default_lambdas(self) -> list[complex]:
        eig = self.eigen_decomposition()
        if len(eig) >= 3:
            return [1.0 + 0j]
        return [lam for lam, _ in eig]

    def hermitian_shadow(self) -> HermitianUnitary:
        """Same P0 but every other block sent to eigenvalue -1."""
        n = self.d * self.d
        return HermitianUnitary(2 * self.p0 - np.eye(n), self.d, self.p)


@dataclass(frozen=True)
class MultiUnitary:
    """Three-term mixture ``(1-p-q) rho + p U rho U^H + q V rho V^H``.

    ``U`` and ``V`` share the fixed space ``P0`` and differ only in the phases
    they put on the common blocks ``Q_k``.
    """

    p0: np.ndarray = field(repr=False)
    projectors: tuple = field(repr=False)
    phases_u: tuple
    phases_v: tuple
    d: int
    p: float = 1 / 3
    q: float = 1 / 3

    def __post_init__(self):
        if not (len(self.projectors) == len(self.phases_u) == len(self.phases_v)):
            raise ContractViolation("one phase per shared projector is required for each unitary")
        n = self.d * self.d
        p0 = _check_projector(self.p0, n, "P0")
        projs = tuple(_check_projector(q, n, "Q_k") for q in self.projectors)
        if np.linalg.norm(p0 + sum(projs) - np.eye(n)) > 1e-8:
            raise ContractViolation("projectors do not sum to the identity")
        _check_weight(self.p, "p")
        _check_weight(self.q, "q")
        if self.p + self.q > 1 + 1e-12:
            raise ContractViolation("p + q must not exceed 1")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "projectors", projs)

    def _unitary(self, phases) -> np.ndarray:
        return self.p0 + sum(np.exp(1j * dl) * q for dl, q in zip(phases, self.projectors))

    @property
    def u(self):
        return self._unitary(self.phases_u)

    @property
    def v(self):
        return self._unitary(self.phases_v)

    def unitaries(self):
        n = self.d * self.d
        return [(1 - self.p - self.q, np.eye(n, dtype=complex)), (self.p, self.u), (self.q, self.v)]

    def eigen_decomposition(self):
        return [(1.0 + 0j, self.p0)]

    def kl_operators(self, lam):
        u, v = self.u, self.v
        lam = complex(lam)
        return [("U", u, lam), ("V", v, lam), ("U^H V", u.conj().T @ v, 1.0 + 0j)]

    def default_lambdas(self):
        return [1.0 + 0j]


NoiseModel = HermitianUnitary | PhasedProjectors | MultiUnitary


# -- channel action and Knill-Laflamme -----------------------------------------

def _check_density(rho, what: str) -> np.ndarray:
    rho = as_cmat(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ContractViolation(f"{what} is not square")
    if np.linalg.norm(rho - rho.conj().T) > _CHECK:
        raise ContractViolation(f"{what} is not hermitian")
    if abs(np.trace(rho) - 1) > _CHECK:
        raise ContractViolation(f"{what} does not have unit trace")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) < -_CHECK:
        raise ContractViolation(f"{what} is not positive semidefinite")
    return rho


def apply_channel(model, rho1, rho2) -> np.ndarray:
    rho1 = _check_density(rho1, "rho1")
    rho2 = _check_density(rho2, "rho2")
    if rho1.shape[0] != model.d or rho2.shape[0] != model.d:
        raise ContractViolation("input states do not match the local dimension")
    rho = np.kron(rho1, rho2)
    return sum(w * (u @ rho @ u.conj().T) for w, u in model.unitaries())


def _isometry(x, what: str) -> np.ndarray:
    x = as_cmat(x)
    if np.linalg.norm(x.conj().T @ x - np.eye(x.shape[1])) > _CHECK:
        raise ContractViolation(f"{what} does not have orthonormal columns")
    return x


def code_projector(r, r_prime) -> np.ndarray:
    return np.kron(r @ r.conj().T, r_prime @ r_prime.conj().T)


def kl_check(kraus: Sequence, r, r_prime, tol: float = 1e-8) -> np.ndarray | None:
    """Matrix ``alpha`` with ``Pi A_i^H A_j Pi = alpha_ij Pi`` on the product code, or None."""
    r = _isometry(r, "r")
    r_prime = _isometry(r_prime, "r_prime")
    ops = [as_cmat(k) for k in kraus]
    n = r.shape[0] * r_prime.shape[0]
    if any(k.shape != (n, n) for k in ops):
        raise ContractViolation("Kraus operators do not act on the product space")
    total = sum(k.conj().T @ k for k in ops)
    if np.linalg.norm(total - np.eye(n)) > 1e-8:
        raise ContractViolation("Kraus operators are not trace preserving")
    pi = code_projector(r, r_prime)
    dim = float(np.real(np.trace(pi)))
    alpha = np.zeros((len(ops), len(ops)), dtype=complex)
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            x = pi @ a.conj().T @ b @ pi
            alpha[i, j] = np.trace(x) / dim
            if np.linalg.norm(x - alpha[i, j] * pi) > tol:
                return None
    return (alpha + alpha.conj().T) / 2


@dataclass
class Eigenspaces:
    p_proj: np.ndarray
    q_proj: np.ndarray

    @property
    def p(self) -> int:
        return _rank_of_projector(self.p_proj)

    @property
    def q(self) -> int:
        return _rank_of_projector(self.q_proj)


def eigenspaces(model):
    """+1 / -1 eigenprojectors of a hermitian unitary, or the validated phase blocks."""
    if isinstance(model, PhasedProjectors):
        return model.eigen_decomposition()
    if not isinstance(model, HermitianUnitary):
        raise ContractViolation("eigenspaces needs a hermitian-unitary or phased model")
    w, v = hermitian_eig(model.u)
    if np.max(np.abs(np.abs(w) - 1)) > 1e-8:
        raise ContractViolation("spectrum is not contained in {+1, -1}")
    plus, minus = v[:, w > 0], v[:, w < 0]
    return Eigenspaces(plus @ plus.conj().T, minus @ minus.conj().T)


def _range_basis(q: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(q)
    return v[:, w > 0.5]


def schmidt_space_of_projector(q, d: int) -> MatrixSpace:
    """Schmidt matrices of an orthonormal eigenbasis of the projector's range."""
    q = _check_projector(q, d * d, "projector")
    vecs = _range_basis(q)
    mats = vecs.T.reshape(vecs.shape[1], d, d)
    return MatrixSpace((d, d), mats)


def product_projector(q, d: int) -> tuple[np.ndarray, np.ndarray] | None:
    """Local projectors with ``q = P_a (x) P_b`` if such a split exists."""
    q = _check_projector(q, d * d, "projector")
    if np.linalg.norm(q) < 1e-12:
        z = np.zeros((d, d), dtype=complex)
        return z, z
    # q[(i j), (k l)] -> r[(i k), (j l)]
    resh = q.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, s, vh = np.linalg.svd(resh)
    if s[1] > 1e-10 * s[0]:
        return None
    a = (np.sqrt(s[0]) * u[:, 0]).reshape(d, d)
    b = (np.sqrt(s[0]) * vh[0]).reshape(d, d)
    ev = np.linalg.eigvals(a)
    alpha = ev[np.argmax(np.abs(ev))]
    pa, pb = a / alpha, b * alpha
    pa, pb = (pa + pa.conj().T) / 2, (pb + pb.conj().T) / 2
    if np.linalg.norm(np.kron(pa, pb) - q) > 1e-10 * max(1.0, np.linalg.norm(q)):
        return None
    if np.linalg.norm(pa @ pa - pa) > 1e-8 or np.linalg.norm(pb @ pb - pb) > 1e-8:
        return None
    return pa, pb


# -- the pipeline -----------------------------------------------------------------

@dataclass
class CodeCertificate:
    r: np.ndarray
    r_prime: np.ndarray
    lam: complex
    residual: float
    layer: str = ""

    @property
    def projector(self) -> np.ndarray:
        return code_projector(self.r, self.r_prime)

    @property
    def dims(self) -> tuple[int, int]:
        return self.r.shape[1], self.r_prime.shape[1]


@dataclass
class BranchReport:
    lam: complex
    verdict: Verdict
    layer: str
    eigenspace_rank: int
    space_dim: int
    block_shape: tuple[int, int]
    certificate: CodeCertificate | None = None
    bounds: dict[str, Any] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)


@dataclass
class DfsReport:
    kind: str
    d: int
    M: int
    N: int
    branches: list[BranchReport]
    seed: int

    @property
    def certificates(self) -> list[CodeCertificate]:
        return [b.certificate for b in self.branches if b.certificate is not None]

    @property
    def verdict(self) -> Verdict:
        vs = [b.verdict for b in self.branches]
        if Verdict.EXISTS in vs:
            return Verdict.EXISTS
        if vs and all(v == Verdict.NOT_EXISTS for v in vs):
            return Verdict.NOT_EXISTS
        return Verdict.UNDECIDED

    def branch(self, lam) -> BranchReport | None:
        for b in self.branches:
            if abs(b.lam - lam) < 1e-9:
                return b
        return None


def _select_lambdas(model, lambdas) -> list[complex]:
    if lambdas in (None, "auto"):
        return model.default_lambdas()
    if lambdas in ("both", "all"):
        return [lam for lam, _ in model.eigen_decomposition()]
    if isinstance(lambdas, (int, float, complex)):
        return [complex(lambdas)]
    return [complex(x) for x in lambdas]


def _bounds(space: MatrixSpace, d, M, N, seed) -> dict[str, Any]:
    q = len(space)
    rm = max_rank(space, seed=seed) if q else 0
    sufficient = (q == 2 and d >= M + N) or (q >= 4 and d >= min(M * q + N, N * q + M)) or q == 0
    return {
        "max_rank": rm,
        "rank_bound": 2 * d - (M + N),
        "necessary_ok": rm <= 2 * d - (M + N),
        "sufficient": bool(sufficient),
    }


def _zero_pattern(space: MatrixSpace) -> dict[str, int]:
    if len(space) == 0:
        return {"shared_zero_rows": space.dims[0], "shared_zero_columns": space.dims[1]}
    return {
        "shared_zero_rows": int(common_cokernel(space).shape[1]),
        "shared_zero_columns": int(common_kernel(space).shape[1]),
    }


def _eigvecs(proj: np.ndarray, rank: int) -> np.ndarray:
    w, v = np.linalg.eigh(proj)
    return v[:, np.argsort(w)[::-1][:rank]]


def _analyze_branch(model, lam, eig_proj, M, N, budget) -> BranchReport:
    d = model.d
    n = d * d
    rank = _rank_of_projector(eig_proj)
    comp = np.eye(n) - eig_proj
    space = schmidt_space_of_projector(comp, d)
    shape = (M, N)
    bounds = _bounds(space, d, M, N, budget.seed)
    details = _zero_pattern(space)
    if rank < M * N:
        return BranchReport(lam, Verdict.NOT_EXISTS, "insufficient-degeneracy", rank, len(space), shape, None, bounds, details)

    cert = None
    if rank == M * N:
        split = product_projector(eig_proj, d)
        ranks = None if split is None else (_rank_of_projector(split[0]), _rank_of_projector(split[1]))
        if ranks != (M, N):
            return BranchReport(lam, Verdict.NOT_EXISTS, "not-product", rank, len(space), shape, None, bounds, details)
        r, rp = _eigvecs(split[0], M), _eigvecs(split[1], N)
        layer = "product-projector"
    else:
        dec = decide(space, d - M, d - N, budget)
        details.update({k: v for k, v in dec.details.items() if k not in ("max_rank", "rank_bound")})
        if dec.certificate is None:
            return BranchReport(lam, dec.verdict, dec.layer, rank, len(space), shape, None, bounds, details)
        r = dec.certificate.u1.conj().T
        rp = np.conj(dec.certificate.v2)
        layer = dec.layer

    cert = CodeCertificate(r, rp, complex(lam), float("nan"), layer)
    report = verify_certificate(space, cert, model, tol=1e-8)
    cert.residual = max(report.residuals.values())
    details["verification"] = report.residuals
    if not report.passed:
        raise NumericalFailure(f"certificate from layer {layer!r} failed re-verification: {report.residuals}")
    return BranchReport(lam, Verdict.EXISTS, layer, rank, len(space), shape, cert, bounds, details)


def dfs_analyze(model, M: int, N: int, budget: SearchBudget | None = None, lambdas="auto") -> DfsReport:
    """Decide and construct ``M x N`` product decoherence-free codes for every relevant eigenvalue."""
    d = model.d
    if not (1 <= M <= d and 1 <= N <= d):
        raise ContractViolation(f"code dimensions {M}x{N} out of range for d = {d}")
    budget = budget or SearchBudget()
    wanted = _select_lambdas(model, lambdas)
    eig = model.eigen_decomposition()
    branches = []
    for lam in wanted:
        match = [proj for mu, proj in eig if abs(mu - lam) < 1e-9]
        if match:
            proj = match[0]
        else:
            proj = np.zeros((d * d, d * d), dtype=complex)
        branches.append(_analyze_branch(model, lam, proj, M, N, budget))
    return DfsReport(type(model).__name__, d, M, N, branches, budget.seed)


def theorem3_q7(space: MatrixSpace) -> PencilVerdict:
    """Two-dimensional +1 eigenspace: decide a 2x2 code at eigenvalue +1 from its two Schmidt matrices."""
    if space.dims != (3, 3):
        raise ContractViolation("needs 3x3 Schmidt matrices")
    on = space.orthonormal()
    if len(on) != 2:
        raise ContractViolation(f"needs a two-dimensional space, got dimension {len(on)}")
    return theorem3_2x2(on.basis[0], on.basis[1])


@dataclass
class UniquenessReport:
    lambdas_with_codes: list[complex]
    analysis: DfsReport

    @property
    def violation(self) -> bool:
        return len(self.lambdas_with_codes) > 1

    def counterexample(self) -> dict[str, Any] | None:
        if not self.violation:
            return None
        return {
            "lambdas": [[z.real, z.imag] for z in self.lambdas_with_codes],
            "certificates": [
                {"r": c.r.tolist(), "r_prime": c.r_prime.tolist(), "lam": [c.lam.real, c.lam.imag]}
                for c in self.analysis.certificates
            ],
        }


def uniqueness_scan(model, M: int = 2, N: int = 2, budget: SearchBudget | None = None) -> UniquenessReport:
    """Run every eigenvalue branch and record whether more than one yields a code."""
    if model.d != 3 or (M, N) != (2, 2):
        raise ContractViolation("uniqueness scan is defined for d = 3 and 2x2 codes")
    rep = dfs_analyze(model, M, N, budget, lambdas="all")
    return UniquenessReport([c.lam for c in rep.certificates], rep)
