"""Brute-force search for a common zero block, and certificate re-checking.

Everything here is deliberately independent of :mod:`macdfs.rankspace`:
only ``numpy.linalg.svd``/``eigvalsh`` and elementwise arithmetic are used,
so agreement between the two is meaningful evidence.

A zero block of shape ``M x N`` shared by all ``C_m`` exists iff some left
isometry ``V1`` (``M x d``) makes the stacked matrix ``[V1 C_1; ...; V1 C_q]``
have rank at most ``d - N``.  The search scores ``V1`` by the
``(d-N+1)``-th singular value of that stack.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize

from .space import MatrixSpace

SEARCH_TOL = 1e-6
_GRID_CHUNK = 40_000


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 256
    max_iters: int = 500
    tol: float = 1e-8
    seed: int = 0
    grid_density: int = 24

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1 or self.grid_density < 2:
            raise ValueError("max_iters >= 1 and grid_density >= 2 required")


@dataclass
class SearchResult:
    status: str  # FOUND | NOT_FOUND | UNDECIDED
    u1: np.ndarray | None
    v2: np.ndarray | None
    residual: float
    min_f: float
    mode: str
    evaluations: int = 0
    profile: list[float] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == "FOUND"


# -- helpers (svd only) --------------------------------------------------------

def _orthonormal_basis(space: MatrixSpace) -> np.ndarray:
    if len(space) == 0:
        return np.zeros((0, *space.dims), dtype=complex)
    vec = space.basis.reshape(len(space), -1).T
    u, s, _ = np.linalg.svd(vec, full_matrices=False)
    r = int(np.count_nonzero(s > 1e-9 * s[0])) if s[0] > 1e-14 else 0
    return u[:, :r].T.reshape(r, *space.dims)


def _score(mats: np.ndarray, u1: np.ndarray, n: int) -> float:
    d = mats.shape[2]
    stack = (u1[None] @ mats).reshape(-1, d)
    s = np.linalg.svd(stack, compute_uv=False)
    k = d - n
    return float(s[k]) if k < s.size else 0.0


def _block_residual(mats: np.ndarray, u1: np.ndarray, v2: np.ndarray) -> float:
    if mats.shape[0] == 0:
        return 0.0
    blocks = u1[None] @ mats @ v2[None]
    return float(np.max(np.linalg.norm(blocks, axis=(1, 2))))


def _complete_right(mats: np.ndarray, u1: np.ndarray, n: int) -> np.ndarray:
    d = mats.shape[2]
    stack = (u1[None] @ mats).reshape(-1, d)
    _, _, vh = np.linalg.svd(stack, full_matrices=True)
    return np.conj(vh[d - n:]).T


def _als(mats: np.ndarray, u1: np.ndarray, n: int, iters: int, target: float):
    """Alternating exact minimization of sum ||u1 C_m v2||^2 over both isometries."""
    q, d, _ = mats.shape
    m = u1.shape[0]
    best = (np.inf, u1, None)
    stall = 0
    for _ in range(iters):
        v2 = _complete_right(mats, u1, n)
        h = (mats @ v2[None]).transpose(1, 0, 2).reshape(d, q * n)
        uu, _, _ = np.linalg.svd(h, full_matrices=True)
        u1 = np.conj(uu[:, d - m:]).T
        v2 = _complete_right(mats, u1, n)
        res = _block_residual(mats, u1, v2)
        if res < best[0] * (1 - 1e-9):
            stall = 0
        else:
            stall += 1
        if res < best[0]:
            best = (res, u1, v2)
        if res < target or stall >= 15:
            break
    return best


def _cp2_point(angles: np.ndarray) -> np.ndarray:
    t1, t2, p1, p2 = angles
    return np.array([
        math.cos(t1),
        math.sin(t1) * math.cos(t2) * np.exp(1j * p1),
        math.sin(t1) * math.sin(t2) * np.exp(1j * p2),
    ])


def _complement_rows(w: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of unit vector ``w``."""
    full = np.linalg.svd(np.conj(w)[None, :], full_matrices=True)[2]
    return full[1:]  # rows r with r @ w = 0


@functools.lru_cache(maxsize=4)
def _grid_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arange(n + 1) * (np.pi / 2) / n
    phi = np.arange(n) * (2 * np.pi) / n
    t1, t2, p1, p2 = np.meshgrid(theta, theta, phi, phi, indexing="ij")
    angles = np.stack([t1.ravel(), t2.ravel(), p1.ravel(), p2.ravel()], axis=1)
    w = np.stack([
        np.cos(angles[:, 0]),
        np.sin(angles[:, 0]) * np.cos(angles[:, 1]) * np.exp(1j * angles[:, 2]),
        np.sin(angles[:, 0]) * np.sin(angles[:, 1]) * np.exp(1j * angles[:, 3]),
    ], axis=1)
    return angles, w


def _eig3_hermitian(g: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a batch of 3 x 3 hermitian matrices (closed form)."""
    a11, a22, a33 = g[:, 0, 0].real, g[:, 1, 1].real, g[:, 2, 2].real
    a12, a13, a23 = g[:, 0, 1], g[:, 0, 2], g[:, 1, 2]
    q = (a11 + a22 + a33) / 3
    p1 = np.abs(a12) ** 2 + np.abs(a13) ** 2 + np.abs(a23) ** 2
    b11, b22, b33 = a11 - q, a22 - q, a33 - q
    p = np.sqrt(np.maximum((b11 ** 2 + b22 ** 2 + b33 ** 2 + 2 * p1) / 6, 0.0))
    safe = np.where(p > 0, p, 1.0)
    det = (b11 * b22 * b33 + 2 * np.real(a12 * a23 * np.conj(a13))
           - b11 * np.abs(a23) ** 2 - b22 * np.abs(a13) ** 2 - b33 * np.abs(a12) ** 2)
    r = np.clip(det / (2 * safe ** 3), -1.0, 1.0)
    phi = np.arccos(r) / 3
    e3 = q + 2 * p * np.cos(phi)
    e1 = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    e2 = 3 * q - e1 - e3
    return np.stack([e1, e2, e3], axis=1)


def grid_scores(mats: np.ndarray, n_right: int, density: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Score every grid point of CP^2 (complement direction of a 2 x 3 left isometry).

    With ``V1^H V1 = I - w w^H`` the Gram matrix of the stack is
    ``sum_m C_m^H C_m - sum_m (C_m^H w)(C_m^H w)^H``, so each point costs one
    small matrix product and a closed-form 3 x 3 eigenvalue.
    """
    angles, w = _grid_points(density)
    q = mats.shape[0]
    gram0 = np.einsum("mji,mjk->ik", np.conj(mats), mats)
    lift = np.conj(mats).transpose(1, 0, 2).reshape(3, 3 * q)
    scores = np.empty(w.shape[0])
    for lo in range(0, w.shape[0], _GRID_CHUNK):
        b = (w[lo:lo + _GRID_CHUNK] @ lift).reshape(-1, q, 3)
        gram = gram0[None] - np.matmul(b.transpose(0, 2, 1), np.conj(b))
        ev = _eig3_hermitian(gram)
        scores[lo:lo + _GRID_CHUNK] = np.sqrt(np.clip(ev[:, n_right - 1], 0.0, None))
    return angles, w, scores


def _select_candidates(w: np.ndarray, scores: np.ndarray, count: int, density: int) -> list[int]:
    order = np.argsort(scores, kind="stable")
    sep = math.cos(2 * (np.pi / 2) / density)
    chosen: list[int] = []
    for idx in order:
        if len(chosen) >= count:
            break
        if all(abs(np.vdot(w[c], w[idx])) < sep for c in chosen):
            chosen.append(int(idx))
    return chosen


def search_zero_block(space: MatrixSpace, M: int, N: int, budget: SearchBudget | None = None) -> SearchResult:
    """Look for isometries ``V1`` (M x d), ``V2`` (d x N) with ``V1 C V2 = 0`` on the space.

    For ``M = d - 1`` with ``d = 3`` the complement direction of ``V1`` is
    scanned exhaustively on a grid of CP^2 and the best grid points are
    refined (Nelder-Mead on the angles, then alternating SVD polishing).
    ``N = d - 1`` is handled by transposition.  Other shapes use seeded random
    restarts with the same polishing.  Only FOUND is a proof; NOT_FOUND is
    strong numerical evidence.
    """
    budget = budget or SearchBudget()
    if not space.is_square:
        raise ValueError("search_zero_block needs square matrices")
    d = space.dims[0]
    if not (0 <= M <= d and 0 <= N <= d):
        raise ValueError("block shape out of range")
    mats = _orthonormal_basis(space)
    eye = np.eye(d, dtype=complex)
    if M * N == 0 or mats.shape[0] == 0:
        return SearchResult("FOUND", eye[:M], eye[:, :N], 0.0, 0.0, "trivial")
    if M != d - 1 and N == d - 1 and d == 3:
        res = search_zero_block(space.transposed(), N, M, budget)
        if res.u1 is not None:
            res.u1, res.v2 = res.v2.T.copy(), res.u1.T.copy()
        return res
    if d == 3 and M == 2:
        return _grid_search(mats, M, N, budget)
    return _restart_search(mats, M, N, budget)


def _finish(mats, u1, v2, best_res, min_f, mode, evals, budget, profile=()) -> SearchResult:
    if u1 is not None and best_res <= budget.tol:
        return SearchResult("FOUND", u1, v2, best_res, min_f, mode, evals, list(profile))
    status = "UNDECIDED" if min(best_res, min_f) < SEARCH_TOL else "NOT_FOUND"
    return SearchResult(status, None, None, best_res, min(best_res, min_f), mode, evals, list(profile))


def _grid_search(mats, M, N, budget) -> SearchResult:
    n = budget.grid_density
    angles, w, scores = grid_scores(mats, N, n)
    evals = scores.size
    profile = scores.reshape(n + 1, -1).min(axis=1).tolist()
    best_res, best_u1, best_v2 = np.inf, None, None
    min_f = float(scores.min())
    for idx in _select_candidates(w, scores, min(budget.restarts, 8), n):
        f = lambda a: _score(mats, _complement_rows(_cp2_point(a)), N)
        opt = minimize(f, angles[idx], method="Nelder-Mead",
                       options={"maxiter": budget.max_iters, "xatol": 1e-12, "fatol": 1e-15})
        evals += opt.nfev
        u1 = _complement_rows(_cp2_point(opt.x))
        res, u1, v2 = _als(mats, u1, N, budget.max_iters, budget.tol * 1e-4)
        min_f = min(min_f, float(opt.fun), res)
        if res < best_res:
            best_res, best_u1, best_v2 = res, u1, v2
        if res <= budget.tol:
            break
    return _finish(mats, best_u1, best_v2, best_res, min_f, "grid", evals, budget, profile)


def _restart_search(mats, M, N, budget) -> SearchResult:
    d = mats.shape[2]
    best_res, best_u1, best_v2 = np.inf, None, None
    evals = 0
    for i in range(budget.restarts):
        rng = np.random.default_rng([budget.seed, i])
        x = rng.normal(size=(d, M)) + 1j * rng.normal(size=(d, M))
        q, _ = np.linalg.qr(x)
        res, u1, v2 = _als(mats, np.conj(q).T, N, budget.max_iters, budget.tol * 1e-4)
        evals += 1
        if res < best_res:
            best_res, best_u1, best_v2 = res, u1, v2
        if res <= budget.tol:
            break
    return _finish(mats, best_u1, best_v2, best_res, best_res, "restarts", evals, budget)


# -- certificate re-verification ---------------------------------------------

@dataclass
class VerificationReport:
    passed: bool
    residuals: dict[str, float]
    tol: float

    def as_dict(self) -> dict[str, Any]:
        return {"status": "PASS" if self.passed else "FAIL", "tol": self.tol, "residuals": self.residuals}


def _entry_product(u1, c, v2):
    m, d = u1.shape
    n = v2.shape[1]
    out = np.zeros((m, n), dtype=complex)
    for i in range(m):
        for j in range(n):
            acc = 0j
            for k in range(d):
                for l in range(c.shape[1]):
                    acc += u1[i, k] * c[k, l] * v2[l, j]
            out[i, j] = acc
    return out


def _isometry_defect(x) -> float:
    # columns of x orthonormal?
    k = x.shape[1]
    worst = 0.0
    for i in range(k):
        for j in range(k):
            g = np.sum(np.conj(x[:, i]) * x[:, j])
            worst = max(worst, abs(g - (1.0 if i == j else 0.0)))
    return worst


def verify_certificate(space: MatrixSpace, cert, model=None, tol: float = 1e-8) -> VerificationReport:
    """Recompute every residual a certificate claims, from raw entries.

    ``cert`` is either a decomposition certificate (``u1``, ``v2``) or a code
    certificate (``r``, ``r_prime``, ``lam``).  With a noise model the
    multiple-access condition ``(R x R') X (R x R') = mu (R x R')`` is checked
    for every noise operator the model exposes.
    """
    if hasattr(cert, "u1"):
        u1, v2 = np.asarray(cert.u1, complex), np.asarray(cert.v2, complex)
        r, rp = np.conj(u1).T, np.conj(v2)
    else:
        r, rp = np.asarray(cert.r, complex), np.asarray(cert.r_prime, complex)
        u1, v2 = np.conj(r).T, np.conj(rp)
    if space.is_square and (u1.shape[1] != space.dims[0] or v2.shape[0] != space.dims[1]):
        raise ValueError("certificate shape does not match the space")
    residuals: dict[str, float] = {}
    scale = space.max_norm or 1.0
    block = 0.0
    for c in space.basis:
        block = max(block, float(np.sqrt(np.sum(np.abs(_entry_product(u1, c, v2)) ** 2))))
    residuals["block"] = block / scale
    residuals["left_isometry"] = _isometry_defect(np.conj(u1).T)
    residuals["right_isometry"] = _isometry_defect(v2)
    if model is not None and hasattr(cert, "r"):
        d = r.shape[0]
        rr = np.einsum("ia,ka->ik", r, np.conj(r))
        rrp = np.einsum("ja,la->jl", rp, np.conj(rp))
        pi = np.einsum("ik,jl->ijkl", rr, rrp).reshape(d * d, d * d)
        trace_pi = float(np.real(np.trace(pi)))
        for name, op, lam in model.kl_operators(cert.lam):
            sand = pi @ op @ pi
            mu = np.trace(sand) / trace_pi
            residuals[f"kl[{name}]"] = float(np.max(np.abs(sand - lam * pi)))
            residuals[f"mu_defect[{name}]"] = float(abs(mu - lam))
    passed = all(v <= tol for v in residuals.values())
    return VerificationReport(passed, residuals, tol)
