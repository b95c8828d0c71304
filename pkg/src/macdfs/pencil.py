"""Exact decision of a common 2x2 zero block for two 3x3 matrices.

The pair is first rotated (unitarily, on both sides) so that a rank-2 member
becomes ``diag(0, b, a)``.  In that frame the max-rank-2 condition reads
``c11 = 0``, ``det C1 = 0`` and ``a c12 c21 + b c13 c31 = 0``, and the zero
block is built explicitly according to which of the cross pairs
``(c12, c13)`` and ``(c21, c31)`` vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .linalg import ContractViolation, as_cmat, generalized_schur, kernel, numerical_rank, svd
from .rankspace import common_cokernel, common_kernel, pencil_max_rank, rank1_in_pencil
from .space import MatrixSpace

CONDITION_TOL = 1e-9
_ZERO_PAIR_TOL = 1e-9


@dataclass
class PencilVerdict:
    exists: bool
    case: str
    u1: np.ndarray | None = None
    v2: np.ndarray | None = None
    residual: float = float("nan")
    reason: str = ""
    canonical: dict[str, Any] = field(default_factory=dict, repr=False)

    @property
    def certificate(self):
        return None if self.u1 is None else (self.u1, self.v2)


def canonical_frame(c1: np.ndarray, c2: np.ndarray):
    """Unitaries ``A, B`` with ``A c2 B = diag(0, b, a)``, ``a >= b``."""
    res = svd(c2)
    perm = np.eye(3)[::-1]
    A = perm @ res.left.conj().T
    B = res.right @ perm.T
    sv = res.singular_values
    return A, B, float(sv[0]), float(sv[1])


def frame_conditions(c1: np.ndarray, a: float, b: float) -> dict[str, complex]:
    return {
        "c11": complex(c1[0, 0]),
        "det": complex(np.linalg.det(c1)),
        "cross": complex(a * c1[0, 1] * c1[1, 0] + b * c1[0, 2] * c1[2, 0]),
    }


def explicit_isometries(c1: np.ndarray, a: float, b: float):
    """The two isometries for the case where both cross pairs are nonzero."""
    n1 = np.sqrt(a**2 * abs(c1[0, 1]) ** 2 + b**2 * abs(c1[0, 2]) ** 2)
    n2 = np.sqrt(a**2 * abs(c1[1, 0]) ** 2 + b**2 * abs(c1[2, 0]) ** 2)
    V1 = np.array([[1, 0, 0], [0, a * c1[0, 1] / n1, b * c1[0, 2] / n1]], dtype=complex)
    V2 = np.array([[1, 0], [0, a * c1[1, 0] / n2], [0, b * c1[2, 0] / n2]], dtype=complex)
    return V1, V2


def _zero_row_case(c1: np.ndarray, c2: np.ndarray):
    """First row of both matrices vanishes: a block exists iff the pencil has a rank-one member."""
    g = rank1_in_pencil(c1, c2)
    if g is None:
        return None
    r = c2 if g == np.inf else c1 - g * c2
    res = svd(r)
    x = res.left[:, 0]
    w = np.array([0, x[2], -x[1]], dtype=complex)
    u1 = np.vstack([np.eye(3)[0], w / np.linalg.norm(w)]).astype(complex)
    stack = np.vstack([u1 @ c1, u1 @ c2])
    v2 = kernel(stack)[:, :2]
    if v2.shape[1] < 2:
        return None
    return u1, v2, g


def _block(u1, v2, mats):
    return max(float(np.linalg.norm(u1 @ m @ v2)) for m in mats)


def _finish(case, u1, v2, mats, scale, **canon) -> PencilVerdict:
    res = _block(u1, v2, mats) / scale
    return PencilVerdict(True, case, u1, v2, res, canonical=canon)


def _rank_one_space(mats, scale) -> PencilVerdict:
    sp = MatrixSpace.from_matrices(mats)
    ck, cc = common_kernel(sp), common_cokernel(sp)
    eye = np.eye(3, dtype=complex)
    if ck.shape[1] >= 2:
        return _finish("rank-one-space", eye[:2], ck[:, :2], mats, scale)
    return _finish("rank-one-space", cc[:, :2].conj().T, eye[:, :2], mats, scale)


def theorem3_2x2(c1, c2) -> PencilVerdict:
    """Exact verdict on a common 2x2 zero block for ``span{c1, c2}`` (3x3)."""
    c1, c2 = as_cmat(c1), as_cmat(c2)
    if c1.shape != (3, 3) or c2.shape != (3, 3):
        raise ContractViolation("both matrices must be 3x3")
    scale = max(np.linalg.norm(c1), np.linalg.norm(c2))
    if scale == 0:
        raise ContractViolation("both matrices are zero")
    orig = [c1, c2]
    c1, c2 = c1 / scale, c2 / scale
    mats = [c1, c2]

    if numerical_rank(np.column_stack([c1.ravel(), c2.ravel()])) < 2:
        m = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        r = numerical_rank(m)
        if r > 2:
            return PencilVerdict(False, "rank-bound", reason="single matrix of rank 3")
        if r <= 1:
            return _rank_one_space(mats, 1.0)
        res = svd(m)
        u1 = res.left[:, 1:].conj().T
        v2 = res.right[:, [0, 2]]
        return _finish("single-matrix", u1, v2, mats, 1.0)

    rm = pencil_max_rank(c1, c2)
    if rm == 3:
        return PencilVerdict(False, "rank-bound", reason="the span contains a rank-3 matrix")
    if rm <= 1:
        return _rank_one_space(mats, 1.0)

    # make the second member a rank-2 element
    if numerical_rank(c2) < 2:
        if numerical_rank(c1) == 2:
            c1, c2 = c2, c1
        else:
            for t in (1.0, 1j, 2.0, -1.5 + 0.5j):
                if numerical_rank(c1 + t * c2) == 2:
                    c2 = c1 + t * c2
                    break
    A, B, a, b = canonical_frame(c1, c2)
    k1 = A @ c1 @ B
    k2 = A @ c2 @ B
    conds = frame_conditions(k1, a, b)
    canon = {"A": A, "B": B, "a": a, "b": b, "c1": k1, "c2": k2, "conditions": conds}
    if max(abs(v) for v in conds.values()) > CONDITION_TOL:
        return PencilVerdict(False, "rank-bound", reason="max-rank-2 conditions violated", canonical=canon)

    row = np.linalg.norm(k1[0, 1:]) > _ZERO_PAIR_TOL
    col = np.linalg.norm(k1[1:, 0]) > _ZERO_PAIR_TOL
    kmats = [k1, k2]
    if row and col:
        V1, V2 = explicit_isometries(k1, a, b)
        case = "cross-pairs"
    elif not row and not col:
        gs = generalized_schur(k1[1:, 1:], k2[1:, 1:])
        U = np.eye(3, dtype=complex)
        V = np.eye(3, dtype=complex)
        U[1:, 1:], V[1:, 1:] = gs.u, gs.v
        # triangular lower-right blocks; swapping the last two rows exposes the block
        U = U[[0, 2, 1]]
        V1, V2 = U[:2], V[:, :2]
        case = "schur-swap"
    elif not row:
        found = _zero_row_case(k1, k2)
        if found is None:
            return PencilVerdict(False, "zero-row-2-subspace", reason="common zero row and no rank-one member", canonical=canon)
        V1, V2, canon["gamma"] = found
        case = "zero-row"
    else:
        found = _zero_row_case(k1.T, k2.T)
        if found is None:
            return PencilVerdict(False, "zero-column-2-subspace", reason="common zero column and no rank-one member", canonical=canon)
        u1t, v2t, canon["gamma"] = found
        V1, V2 = v2t.T, u1t.T
        case = "zero-column"
    canon.update(V1=V1, V2=V2, frame_residual=_block(V1, V2, kmats))
    return _finish(case, V1 @ A, B @ V2, orig, scale, **canon)
