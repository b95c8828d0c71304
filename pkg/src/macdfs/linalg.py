"""Dense complex linear algebra used by every other module.

All rank decisions go through :func:`numerical_rank`, which reads the active
:class:`Tolerance`.  Tests can tighten or loosen the policy globally with the
:func:`tolerance` context manager.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np


class NumericalFailure(RuntimeError):
    """A decomposition did not reach its accuracy target."""


class ContractViolation(ValueError):
    """An input does not satisfy the documented precondition."""


@dataclass(frozen=True)
class Tolerance:
    rank_rel: float = 1e-9
    rank_abs: float = 1e-14
    check: float = 1e-10
    certificate: float = 1e-8


_TOL: contextvars.ContextVar[Tolerance] = contextvars.ContextVar("macdfs_tolerance", default=Tolerance())


def get_tolerance() -> Tolerance:
    return _TOL.get()


@contextlib.contextmanager
def tolerance(**overrides) -> Iterator[Tolerance]:
    """Temporarily override fields of the active tolerance policy."""
    token = _TOL.set(replace(_TOL.get(), **overrides))
    try:
        yield _TOL.get()
    finally:
        _TOL.reset(token)


class SvdResult(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray


class GenSchurResult(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    ta: np.ndarray
    tb: np.ndarray


def as_cmat(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ContractViolation(f"expected a nonempty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def svd(m) -> SvdResult:
    """Full SVD ``m = left @ diag(s) @ right^H`` with unitary factors.

    ``right`` holds the right singular vectors as columns.
    """
    a = as_cmat(m)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc
    return SvdResult(u, s, dagger(vh))


def numerical_rank(m, tol_rel: float | None = None) -> int:
    tol = get_tolerance()
    rel = tol.rank_rel if tol_rel is None else tol_rel
    if rel <= 0:
        raise ContractViolation("tol_rel must be positive")
    a = as_cmat(m)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] <= tol.rank_abs:
        return 0
    return int(np.count_nonzero(s > rel * s[0]))


def kernel(m, tol_rel: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the right null space of ``m``."""
    a = as_cmat(m)
    r = numerical_rank(a, tol_rel)
    res = svd(a)
    return res.right[:, r:].copy()


def left_kernel(m, tol_rel: float | None = None) -> np.ndarray:
    """Orthonormal rows ``w`` with ``w @ m = 0``."""
    return dagger(kernel(dagger(as_cmat(m)), tol_rel))


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    a = as_cmat(m)
    if a.shape[0] != a.shape[1]:
        raise ContractViolation("hermitian_eig needs a square matrix")
    scale = max(np.linalg.norm(a, 2), 1.0)
    if np.linalg.norm(a - dagger(a), 2) > get_tolerance().check * scale:
        raise ContractViolation("matrix is not hermitian")
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    return w, v


def is_unitary(m, atol: float | None = None) -> bool:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    atol = get_tolerance().check if atol is None else atol
    return bool(np.linalg.norm(dagger(a) @ a - np.eye(a.shape[0]), 2) <= atol)


def orthonormal_rows(m) -> np.ndarray:
    """Orthonormal rows spanning the same row space as ``m`` (full row rank assumed)."""
    q, _ = np.linalg.qr(as_cmat(m).T)
    return q.T


def orthonormal_columns(m) -> np.ndarray:
    q, _ = np.linalg.qr(as_cmat(m))
    return q


def householder_unitary(x: np.ndarray) -> np.ndarray:
    """Hermitian unitary whose first column is parallel to ``x``."""
    x = np.asarray(x, dtype=complex).ravel()
    n = x.size
    nx = np.linalg.norm(x)
    if nx == 0:
        return np.eye(n, dtype=complex)
    x = x / nx
    if np.linalg.norm(x[1:]) <= 1e-15:
        return np.eye(n, dtype=complex)
    phase = x[0] / abs(x[0]) if abs(x[0]) > 0 else 1.0
    w = x.copy()
    w[0] += phase
    return np.eye(n, dtype=complex) - 2.0 * np.outer(w, np.conj(w)) / np.vdot(w, w).real


# -- pencil determinant ------------------------------------------------------

def det_pencil_coefficients(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients (lowest degree first) of ``det(a - lam * b)``.

    Evaluated on a circle of roots of unity and recovered by a discrete
    Fourier transform, which keeps the interpolation well conditioned.
    """
    n = a.shape[0]
    if n == 0:
        return np.array([1.0 + 0j])
    na, nb = np.linalg.norm(a, 2), np.linalg.norm(b, 2)
    rho = na / nb if na > 0 and nb > 0 else 1.0
    k = n + 1
    nodes = rho * np.exp(2j * np.pi * np.arange(k) / k)
    vals = np.array([np.linalg.det(a - z * b) for z in nodes])
    coef = np.fft.fft(vals) / k
    # fft gives sum_j vals_j w^{-jk}; the coefficient of lam^m is c_m rho^m
    return coef / rho ** np.arange(k)


def _trim(coef: np.ndarray, tol: float) -> np.ndarray:
    nz = np.nonzero(np.abs(coef) > tol)[0]
    if nz.size == 0:
        return coef[:0]
    return coef[: nz[-1] + 1]


def _pencil_vector(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit vector x with a@x and b@x linearly dependent (a generalized eigenvector)."""
    n = a.shape[0]
    if n == 1:
        return np.ones(1, dtype=complex)
    scale = max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1e-300)
    a_, b_ = a / scale, b / scale
    coef = det_pencil_coefficients(a_, b_)
    cnorm = np.max(np.abs(coef)) if coef.size else 0.0
    candidates: list[np.ndarray] = []

    def smallest_right(m):
        _, sv, vh = np.linalg.svd(m)
        null = np.conj(vh[sv <= 1e-12 * max(sv[0], 1.0)])
        if null.shape[0] > 1 and np.linalg.norm(null[:, 0]) > 1e-8:
            # degenerate null space: take the direction closest to e0 for stable output
            x = null.T @ np.conj(null[:, 0])
            return x / np.linalg.norm(x)
        return np.conj(vh[-1])

    trimmed = _trim(coef, 1e-11 * max(cnorm, 1.0))
    if trimmed.size == 0:
        # singular pencil: every lam is an eigenvalue
        candidates.append(smallest_right(a_))
    else:
        roots = np.roots(trimmed[::-1]) if trimmed.size > 1 else np.array([])
        for lam in roots:
            x = smallest_right(a_ - lam * b_)
            # one Rayleigh refinement step
            bx = b_ @ x
            if np.vdot(bx, bx).real > 1e-24:
                lam2 = np.vdot(bx, a_ @ x) / np.vdot(bx, bx)
                candidates.append(smallest_right(a_ - lam2 * b_))
            candidates.append(x)
        if trimmed.size < n + 1:
            # degree deficit: b is singular, infinite eigenvalue present
            candidates.append(smallest_right(b_))
    best, best_res = None, np.inf
    for x in candidates:
        x = x / np.linalg.norm(x)
        pair = np.column_stack([a_ @ x, b_ @ x])
        res = np.linalg.svd(pair, compute_uv=False)[-1]
        if res < best_res:
            best, best_res = x, res
    return best


def generalized_schur(a, b) -> GenSchurResult:
    """Simultaneous unitary triangularization ``u a v = ta``, ``u b v = tb``.

    Works by deflation: a generalized eigenvector of the trailing pencil is
    rotated to the leading position by Householder reflections on both sides,
    then the procedure recurses on the trailing block.
    """
    a, b = as_cmat(a), as_cmat(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ContractViolation("generalized_schur needs two square matrices of equal size")
    n = a.shape[0]
    ta, tb = a.copy(), b.copy()
    u = np.eye(n, dtype=complex)
    v = np.eye(n, dtype=complex)
    for k in range(n - 1):
        x = _pencil_vector(ta[k:, k:], tb[k:, k:])
        z = householder_unitary(x)
        ta[:, k:] = ta[:, k:] @ z
        tb[:, k:] = tb[:, k:] @ z
        v[:, k:] = v[:, k:] @ z
        pair = np.column_stack([ta[k:, k], tb[k:, k]])
        uu, s, _ = np.linalg.svd(pair)
        y = uu[:, 0] if s[0] > 0 else np.eye(n - k, dtype=complex)[:, 0]
        h = householder_unitary(y)
        ta[k:, :] = dagger(h) @ ta[k:, :]
        tb[k:, :] = dagger(h) @ tb[k:, :]
        u[k:, :] = dagger(h) @ u[k:, :]
    scale = np.linalg.norm(a, 2) + np.linalg.norm(b, 2)
    low = max(np.max(np.abs(np.tril(ta, -1)), initial=0.0), np.max(np.abs(np.tril(tb, -1)), initial=0.0))
    if low > 1e-8 * max(scale, 1e-300):
        raise NumericalFailure(f"generalized Schur deflation stalled (lower residual {low:.2e})")
    return GenSchurResult(u, v, ta, tb)


# -- minors of small matrices ------------------------------------------------

def minors(m: np.ndarray, k: int) -> np.ndarray:
    """All k x k minors of ``m`` (flat array)."""
    rows, cols = m.shape
    if k > min(rows, cols):
        return np.zeros(0, dtype=complex)
    out = []
    for r in itertools.combinations(range(rows), k):
        sub = m[list(r), :]
        for c in itertools.combinations(range(cols), k):
            out.append(np.linalg.det(sub[:, list(c)]))
    return np.array(out, dtype=complex)


def pencil_minor_polynomials(b0: np.ndarray, b1: np.ndarray, k: int) -> np.ndarray:
    """Coefficients (row per minor, lowest degree first) of the k x k minors of ``b0 - g * b1``."""
    npts = k + 1
    nodes = np.exp(2j * np.pi * np.arange(npts) / npts)
    vals = np.array([minors(b0 - z * b1, k) for z in nodes])  # npts x nminors
    if vals.size == 0:
        return np.zeros((0, npts), dtype=complex)
    return (np.fft.fft(vals, axis=0) / npts).T
