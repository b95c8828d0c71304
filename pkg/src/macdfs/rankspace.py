"""Spaces of matrices of bounded rank: maximal rank, k-subspaces, common
kernels, and decomposability decisions with constructive certificates.

Decomposability convention: a ``(t, s)``-decomposable space of ``d x d``
matrices is unitarily equivalent to one whose elements all carry a zero block
of shape ``(d - t) x (d - s)`` in the upper-left corner.  A certificate holds
the two isometries that cut out that block: ``u1`` (``M x d``, orthonormal
rows) and ``v2`` (``d x N``, orthonormal columns) with ``u1 @ C @ v2 = 0``
for every element ``C``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .linalg import (
    ContractViolation,
    generalized_schur,
    get_tolerance,
    kernel,
    left_kernel,
    numerical_rank,
    orthonormal_columns,
    pencil_minor_polynomials,
    svd,
)
from .oracle import SearchBudget, search_zero_block
from .space import MatrixSpace

__all__ = [
    "MatrixSpace",
    "DecompCertificate",
    "Decision",
    "Verdict",
    "max_rank",
    "pencil_max_rank",
    "pencil_rank_drop",
    "rank1_in_pencil",
    "is_k_subspace",
    "common_kernel",
    "common_cokernel",
    "necessary_rank_bound",
    "decide",
    "decompose",
]

_KERNEL_SPAN_TOL = 1e-8


class Verdict(str, enum.Enum):
    EXISTS = "EXISTS"
    NOT_EXISTS = "NOT-EXISTS"
    UNDECIDED = "UNDECIDED"


@dataclass
class DecompCertificate:
    t: int
    s: int
    u1: np.ndarray
    v2: np.ndarray
    residual: float
    layer: str = ""

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.u1.shape[0], self.v2.shape[1]


@dataclass
class Decision:
    verdict: Verdict
    layer: str
    certificate: DecompCertificate | None = None
    details: dict[str, Any] = field(default_factory=dict)


# -- rank analytics -----------------------------------------------------------

def pencil_max_rank(c1, c2) -> int:
    """Exact generic rank of span{c1, c2} from the minor polynomials of ``c1 - g c2``."""
    c1, c2 = np.asarray(c1, complex), np.asarray(c2, complex)
    scale = max(np.linalg.norm(c1), np.linalg.norm(c2))
    if scale <= get_tolerance().rank_abs:
        return 0
    c1, c2 = c1 / scale, c2 / scale
    for k in range(min(c1.shape), 0, -1):
        polys = pencil_minor_polynomials(c1, c2, k)
        if polys.size and np.max(np.abs(polys)) > get_tolerance().rank_rel:
            return k
    return 0


def max_rank(sp: MatrixSpace, trials: int = 64, seed: int = 0) -> int:
    """Maximal rank over the space.

    Random complex combinations give a certified lower bound that equals the
    true value with probability one; two-dimensional spaces of matrices with
    at most three rows or columns use the exact pencil analysis instead.
    """
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    on = sp.orthonormal()
    if len(on) == 0:
        return 0
    if len(on) == 1:
        return numerical_rank(on.basis[0])
    if len(on) == 2 and min(sp.dims) <= 3:
        return pencil_max_rank(on.basis[0], on.basis[1])
    rng = np.random.default_rng(seed)
    best = max(numerical_rank(m) for m in on.basis)
    cap = min(sp.dims)
    for _ in range(trials):
        if best == cap:
            break
        best = max(best, numerical_rank(on.random_element(rng)))
    return best


def _polish_root(polys: np.ndarray, g: complex, iters: int = 30) -> complex:
    deg = polys.shape[1]
    powers = np.arange(deg)
    dcoef = polys[:, 1:] * powers[1:]
    for _ in range(iters):
        vals = polys @ (g ** powers)
        jac = dcoef @ (g ** powers[:-1]) if deg > 1 else np.zeros(polys.shape[0])
        den = np.vdot(jac, jac).real
        if den == 0:
            break
        step = np.vdot(jac, vals) / den
        g_new = g - step
        if np.linalg.norm(polys @ (g_new ** powers)) >= np.linalg.norm(vals):
            break
        g = g_new
    return g


def pencil_rank_drop(b0, b1, r: int) -> list[complex]:
    """Parameters ``g`` with ``rank(b0 - g b1) <= r`` (``math.inf`` stands for ``b1`` itself).

    The ``(r+1) x (r+1)`` minors of the pencil are polynomials in ``g``; roots
    of the dominant one are polished against all minors and accepted when
    every minor vanishes to ``1e-8`` of the matrix scale.  Zero members of
    the pencil are never reported.  If every member qualifies, ``[0]`` is
    returned.
    """
    b0, b1 = np.asarray(b0, complex), np.asarray(b1, complex)
    scale = max(np.linalg.norm(b0), np.linalg.norm(b1))
    if scale <= get_tolerance().rank_abs:
        raise ContractViolation("degenerate pencil: both members are zero")
    b0, b1 = b0 / scale, b1 / scale
    nz = lambda g: np.linalg.norm(b0 - g * b1) > 1e-9 * max(1.0, abs(g))
    if r + 1 > min(b0.shape):
        return [0j] if nz(0) else [math.inf]
    polys = pencil_minor_polynomials(b0, b1, r + 1)
    size = np.max(np.abs(polys), axis=1)
    out: list[complex] = []
    if np.max(size) <= 1e-10:
        return [0j] if nz(0) else [1.0 + 0j]
    lead = polys[int(np.argmax(size))]
    keep = np.nonzero(np.abs(lead) > 1e-12 * np.max(np.abs(lead)))[0]
    lead = lead[: keep[-1] + 1]
    roots = np.roots(lead[::-1]) if lead.size > 1 else np.array([])
    for g in sorted(roots, key=lambda z: (round(abs(z), 9), round(np.angle(z), 9))):
        g = _polish_root(polys, complex(g))
        vals = polys @ (g ** np.arange(polys.shape[1]))
        if np.max(np.abs(vals)) <= 1e-8 * max(1.0, abs(g)) ** (r + 1) and nz(g):
            if all(abs(g - h) > 1e-7 * max(1.0, abs(g)) for h in out if h != math.inf):
                out.append(g)
    if np.linalg.norm(b1) > 1e-9 and numerical_rank(b1) <= r:
        out.append(math.inf)
    return out


def rank1_in_pencil(c1, c2) -> complex | float | None:
    """A ``g`` with ``rank(c1 - g c2) <= 1`` (``math.inf`` means ``c2`` itself), else None."""
    found = pencil_rank_drop(c1, c2, 1)
    return found[0] if found else None


def common_kernel(sp: MatrixSpace) -> np.ndarray:
    if len(sp) == 0:
        return np.eye(sp.dims[1], dtype=complex)
    return kernel(np.vstack(list(sp.basis)))


def common_cokernel(sp: MatrixSpace) -> np.ndarray:
    """Columns ``w`` with ``w^H C = 0`` for every element ``C``."""
    if len(sp) == 0:
        return np.eye(sp.dims[0], dtype=complex)
    return kernel(np.vstack([m.conj().T for m in sp.basis]))


def necessary_rank_bound(sp: MatrixSpace, M: int, N: int, trials: int = 64, seed: int = 0) -> bool:
    """False certifies that no ``M x N`` zero block can be cut out of the space."""
    return max_rank(sp, trials, seed) <= 2 * sp.d - (M + N)


def _compression_11(on: MatrixSpace, seed: int) -> tuple[bool, np.ndarray | None, np.ndarray | None, dict]:
    """(1,1)-type zero block for a rank-2-bounded space of 3 x 3 matrices."""
    rng = np.random.default_rng(seed)
    kers = []
    for _ in range(10):
        g = on.random_element(rng)
        if numerical_rank(g) == 2:
            kers.append(kernel(g)[:, 0])
    if not kers:
        raise ContractViolation("kernel-span route needs elements of rank 2")
    span = np.column_stack(kers)
    sv = np.linalg.svd(span, compute_uv=False)
    rk = int(np.count_nonzero(sv > _KERNEL_SPAN_TOL * sv[0]))
    info = {"kernel_span_rank": rk, "kernel_span_singular_values": sv[:3].tolist()}
    mats = list(on.basis)
    if rk == 3:
        return False, None, None, info
    if rk == 2:
        y = svd(span).left[:, :2]
        h = np.hstack([m @ y for m in mats])
        if numerical_rank(h) > 1:
            return False, None, None, info
        return True, left_kernel(h)[:2], y, info
    k = span[:, :1] / np.linalg.norm(span[:, 0])
    perp = kernel(k.conj().T)
    b0 = np.column_stack([m @ perp[:, 0] for m in mats])
    b1 = np.column_stack([m @ perp[:, 1] for m in mats])
    cands = pencil_rank_drop(b0, -b1, 1)
    info["kernel_direction_candidates"] = len(cands)
    if not cands:
        return False, None, None, info
    g = cands[0]
    y = perp[:, 1] if g == math.inf else perp[:, 0] + g * perp[:, 1]
    yy = orthonormal_columns(np.column_stack([k[:, 0], y]))
    h = np.hstack([m @ yy for m in mats])
    return True, left_kernel(h)[:2], yy, info


def is_k_subspace(sp: MatrixSpace, k: int, seed: int = 0, trials: int = 64) -> bool:
    """True iff every nonzero element of the space has rank exactly ``k``."""
    on = sp.orthonormal()
    dim = len(on)
    if dim == 0:
        raise ContractViolation("is_k_subspace needs a nonzero space")
    if dim == 1:
        return numerical_rank(on.basis[0]) == k
    if max_rank(on, trials, seed) != k:
        return False
    if k == 1:
        return True
    if dim == 2:
        return not pencil_rank_drop(on.basis[0], on.basis[1], k - 1)
    if on.dims == (3, 3) and k == 2:
        if dim >= 4:
            return False
        if common_kernel(on).shape[1] or common_cokernel(on).shape[1]:
            return False
        return not _compression_11(on, seed)[0]
    if on.is_square and k == on.d:
        return False
    rng = np.random.default_rng(seed)
    pairs = [(on.basis[i], on.basis[j]) for i in range(dim) for j in range(i + 1, dim)]
    pairs += [(on.random_element(rng), on.random_element(rng)) for _ in range(trials)]
    return not any(pencil_rank_drop(a, b, k - 1) for a, b in pairs)


# -- certificates ------------------------------------------------------------

def block_residual(sp: MatrixSpace, u1, v2) -> float:
    if len(sp) == 0:
        return 0.0
    blocks = np.asarray(u1)[None] @ sp.basis @ np.asarray(v2)[None]
    return float(np.max(np.linalg.norm(blocks, axis=(1, 2))) / sp.max_norm)


def complete_from_left(mats, u1, n: int) -> np.ndarray | None:
    stack = np.vstack([u1 @ m for m in mats])
    ker = kernel(stack)
    return ker[:, :n] if ker.shape[1] >= n else None


def complete_from_right(mats, v2, m: int) -> np.ndarray | None:
    h = np.hstack([c @ v2 for c in mats])
    lk = left_kernel(h)
    return lk[:m] if lk.shape[0] >= m else None


def _certify(sp: MatrixSpace, t, s, u1, v2, layer) -> DecompCertificate | None:
    if u1 is None or v2 is None:
        return None
    res = block_residual(sp, u1, v2)
    if res > get_tolerance().certificate:
        return None
    return DecompCertificate(t, s, np.asarray(u1, complex), np.asarray(v2, complex), res, layer)


def _exists(sp, t, s, u1, v2, layer, **details) -> Decision | None:
    cert = _certify(sp, t, s, u1, v2, layer)
    if cert is None:
        return None
    return Decision(Verdict.EXISTS, layer, cert, details)


def decide(sp: MatrixSpace, t: int, s: int, budget: SearchBudget | None = None) -> Decision:
    """Decide ``(t, s)``-decomposability, i.e. a common ``(d-t) x (d-s)`` zero block.

    Exact layers are tried in a fixed order; only those can refuse.  The last
    layer is the numerical search, which can only confirm.
    """
    budget = budget or SearchBudget()
    d = sp.d
    if not (0 <= t <= d and 0 <= s <= d):
        raise ContractViolation(f"(t, s) = ({t}, {s}) out of range for d = {d}")
    M, N = d - t, d - s
    eye = np.eye(d, dtype=complex)
    on = sp.orthonormal()
    mats = list(on.basis)
    q = len(mats)

    if M * N == 0 or q == 0:
        return _exists(sp, t, s, eye[:M], eye[:, :N], "trivial")

    bound = 2 * d - (M + N)
    rm = max_rank(on, seed=budget.seed)
    info = {"max_rank": rm, "rank_bound": bound, "dim": q}
    if rm > bound:
        return Decision(Verdict.NOT_EXISTS, "necessary-bound", None, info)

    ck = common_kernel(on)
    if ck.shape[1] >= N:
        dec = _exists(sp, t, s, eye[:M], ck[:, :N], "common-kernel", **info)
        if dec:
            return dec
    cc = common_cokernel(on)
    if cc.shape[1] >= M:
        dec = _exists(sp, t, s, cc[:, :M].conj().T, eye[:, :N], "common-cokernel", **info)
        if dec:
            return dec

    if M == d or N == d:
        # a full-height (full-width) block is exactly a common kernel (cokernel)
        return Decision(Verdict.NOT_EXISTS, "common-kernel-exhausted", None,
                        {**info, "common_kernel_dim": ck.shape[1], "common_cokernel_dim": cc.shape[1]})

    if q == 1:
        res = svd(mats[0])
        r = numerical_rank(mats[0])
        u1 = res.left[:, d - M:].conj().T
        cols = [j for j in range(d) if not (d - M <= j < r)][:N]
        dec = _exists(sp, t, s, u1, res.right[:, cols], "single-matrix-svd", **info)
        if dec:
            return dec

    if q == 2 and d >= M + N:
        gs = generalized_schur(mats[0], mats[1])
        dec = _exists(sp, t, s, gs.u[d - M:], gs.v[:, :N], "generalized-schur", **info)
        if dec:
            return dec
    if q == 2 and d == 3 and M == N == 2:
        from .pencil import theorem3_2x2

        verdict = theorem3_2x2(mats[0], mats[1])
        layer = f"pencil-2x2/{verdict.case}"
        if not verdict.exists:
            return Decision(Verdict.NOT_EXISTS, layer, None, {**info, "reason": verdict.reason})
        dec = _exists(sp, t, s, verdict.u1, verdict.v2, layer, **info)
        if dec:
            return dec

    if q >= 4 and d >= min(M * q + N, N * q + M):
        if d >= M * q + N:
            u1 = eye[:M]
            v2 = complete_from_left(mats, u1, N)
        else:
            v2 = eye[:, :N]
            u1 = complete_from_right(mats, v2, M)
        dec = _exists(sp, t, s, u1, v2, "dimension-count", **info)
        if dec:
            return dec

    if d == 3 and M == N == 2:
        ok, u1, v2, extra = _compression_11(on, budget.seed)
        info.update(extra)
        if not ok:
            return Decision(Verdict.NOT_EXISTS, "kernel-span", None, info)
        dec = _exists(sp, t, s, u1, v2, "kernel-span", **info)
        if dec:
            return dec

    found = search_zero_block(on, M, N, budget)
    info.update({"search_status": found.status, "search_min_f": found.min_f})
    if found.found:
        dec = _exists(sp, t, s, found.u1, found.v2, "search", **info)
        if dec:
            return dec
    return Decision(Verdict.UNDECIDED, "search", None, info)


def decompose(sp: MatrixSpace, t: int, s: int, budget: SearchBudget | None = None) -> DecompCertificate | None:
    return decide(sp, t, s, budget).certificate
