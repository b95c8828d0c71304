"""Problem instances: the six worked 2x2 examples and seeded random families."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import HermitianUnitary, MultiUnitary, PhasedProjectors, projector_onto
from .ket import parse_ket


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_complex(shape, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_isometry(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return random_unitary(n, rng)[:, :k]


def random_projector(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    v = random_isometry(n, k, rng)
    return v @ v.conj().T


def random_product_code(d: int, M: int, N: int, rng: np.random.Generator):
    """Isometries ``r`` (d x M), ``r_prime`` (d x N) and the code projector."""
    r, rp = random_isometry(d, M, rng), random_isometry(d, N, rng)
    return r, rp, np.kron(r @ r.conj().T, rp @ rp.conj().T)


def _subspace_inside(basis: np.ndarray, k: int, rng) -> np.ndarray:
    """Projector onto a random k-dimensional subspace of span(basis columns)."""
    coeff = random_isometry(basis.shape[1], k, rng)
    return projector_onto(basis @ coeff) if k else np.zeros((basis.shape[0],) * 2, dtype=complex)


# -- hermitian-unitary models ---------------------------------------------------

def random_model(d: int, q: int, rng: np.random.Generator, p: float = 0.5) -> HermitianUnitary:
    return HermitianUnitary.from_projector(random_projector(d * d, q, rng), d, p)


def planted_plus_model(d: int, M: int, N: int, q: int, rng, p: float = 0.5):
    """Model whose -1 eigenspace avoids a random product code (a code at +1)."""
    n = d * d
    r, rp, code = random_product_code(d, M, N, rng)
    if q > n - M * N:
        raise ValueError("q too large to plant a +1 code")
    perp = np.linalg.eigh(np.eye(n) - code)[1][:, M * N:]
    qproj = _subspace_inside(perp, q, rng)
    return HermitianUnitary.from_projector(qproj, d, p), (r, rp)


def planted_minus_model(d: int, M: int, N: int, q: int, rng, p: float = 0.5):
    """Model whose -1 eigenspace contains a random product code."""
    n = d * d
    if q < M * N:
        raise ValueError("q too small to plant a -1 code")
    r, rp, code = random_product_code(d, M, N, rng)
    perp = np.linalg.eigh(np.eye(n) - code)[1][:, M * N:]
    extra = _subspace_inside(perp, q - M * N, rng)
    return HermitianUnitary.from_projector(code + extra, d, p), (r, rp)


def zero_row_model(q: int, rng, p: float = 0.5) -> HermitianUnitary:
    """d=3, -1 eigenspace spanned by states whose Schmidt matrices share a zero row, locally rotated."""
    d = 3
    basis = np.eye(9)[:, 3:]  # amplitudes with first local index nonzero
    qproj = _subspace_inside(basis, q, rng)
    local = np.kron(random_unitary(d, rng), random_unitary(d, rng))
    qproj = local @ qproj @ local.conj().T
    if rng.random() < 0.5:
        swap = np.eye(9)[[3 * (i % 3) + i // 3 for i in range(9)]]
        qproj = swap @ qproj @ swap.T
    return HermitianUnitary.from_projector(qproj, d, p)


def mixed_model(rng: np.random.Generator, d: int = 3, M: int = 2, N: int = 2) -> tuple[str, HermitianUnitary]:
    """One draw from the q-uniform mixture of generic, planted and structured models."""
    q = int(rng.integers(1, 9))
    n = d * d
    fams = ["generic"]
    if q <= n - M * N:
        fams.append("plant+")
    if q >= M * N:
        fams.append("plant-")
    if q <= 6:
        fams.append("zero-row")
    fam = fams[int(rng.integers(len(fams)))]
    if fam == "generic":
        return fam, random_model(d, q, rng)
    if fam == "plant+":
        return fam, planted_plus_model(d, M, N, q, rng)[0]
    if fam == "plant-":
        return fam, planted_minus_model(d, M, N, q, rng)[0]
    return fam, zero_row_model(q, rng)


# -- pairs of 3x3 matrices for the exact two-matrix decision -------------------------

def cross_pair_instance(rng: np.random.Generator):
    """Pair in the canonical frame with the three max-rank-2 conditions and both cross pairs nonzero,
    then rotated by random local unitaries."""
    a, b = np.sort(rng.uniform(0.3, 2.0, size=2))[::-1]
    c12, c13, c21 = random_complex(3, rng)
    c31 = -a * c12 * c21 / (b * c13)
    c1 = np.zeros((3, 3), dtype=complex)
    c1[0, 1:] = c12, c13
    c1[1:, 0] = c21, c31
    # lower-right block chosen so that det C1 = 0: det = -c12 (c21 c33 - c23 c31) + c13 (c21 c32 - c22 c31)
    c22, c23, c32 = random_complex(3, rng)
    num = c12 * c23 * c31 + c13 * (c21 * c32 - c22 * c31)
    c33 = num / (c12 * c21)
    c1[1, 1:] = c22, c23
    c1[2, 1:] = c32, c33
    c2 = np.diag([0, b, a]).astype(complex)
    A, B = random_unitary(3, rng), random_unitary(3, rng)
    mix = random_complex(2, rng)
    return A @ (c1 + mix[0] * c2) @ B, A @ (mix[1] * c2) @ B


def zero_line_instance(rng: np.random.Generator):
    """Pair spanning a 2-subspace with a common zero row (or column), locally rotated."""
    # 2x3 pencils generically have no rank-one member, so the span stays a 2-subspace
    c1 = np.vstack([np.zeros(3), random_complex((2, 3), rng)])
    c2 = np.vstack([np.zeros(3), random_complex((2, 3), rng)])
    if rng.random() < 0.5:
        c1, c2 = c1.T, c2.T
    A, B = random_unitary(3, rng), random_unitary(3, rng)
    return A @ c1 @ B, A @ c2 @ B


def rank3_instance(rng: np.random.Generator):
    """Generic pair: the span contains invertible matrices."""
    return random_complex((3, 3), rng), random_complex((3, 3), rng)


# -- phased and three-unitary models ----------------------------------------------

def phased_model(rng: np.random.Generator, planted: bool, d: int = 3, p0_rank: int = 5, phases: int = 3):
    """``U = P0 + sum_k exp(i delta_k) P_k`` with ``phases`` distinct eigenvalues in total."""
    n = d * d
    if planted:
        _, _, code = random_product_code(d, 2, 2, rng)
        perp = np.linalg.eigh(np.eye(n) - code)[1][:, 4:]
        p0 = code + _subspace_inside(perp, p0_rank - 4, rng)
    else:
        p0 = random_projector(n, p0_rank, rng)
    rest = np.linalg.eigh(np.eye(n) - p0)[1][:, p0_rank:]
    rest = rest @ random_unitary(rest.shape[1], rng)
    sizes = _split(rest.shape[1], phases - 1, rng)
    deltas = _distinct_phases(phases - 1, rng)
    blocks, start = [], 0
    for delta, k in zip(deltas, sizes):
        v = rest[:, start:start + k]
        blocks.append((float(delta), v @ v.conj().T))
        start += k
    return PhasedProjectors(p0, tuple(blocks), d)


def _split(total: int, parts: int, rng) -> list[int]:
    cuts = np.sort(rng.choice(np.arange(1, total), size=parts - 1, replace=False)) if parts > 1 else []
    edges = [0, *cuts, total]
    return [int(edges[i + 1] - edges[i]) for i in range(parts)]


def _distinct_phases(k: int, rng) -> np.ndarray:
    while True:
        ph = rng.uniform(0.2, 2 * np.pi - 0.2, size=k)
        if k < 2 or np.min(np.diff(np.sort(ph))) > 0.1:
            return ph


def tri_unitary_model(rng: np.random.Generator, d: int = 3, p0_rank: int = 5, blocks: int = 2):
    """Two unitaries sharing a P0 that contains a random 2x2 product code."""
    n = d * d
    _, _, code = random_product_code(d, 2, 2, rng)
    perp = np.linalg.eigh(np.eye(n) - code)[1][:, 4:]
    p0 = code + _subspace_inside(perp, p0_rank - 4, rng)
    rest = np.linalg.eigh(np.eye(n) - p0)[1][:, p0_rank:]
    sizes = _split(rest.shape[1], blocks, rng)
    projs, start = [], 0
    for k in sizes:
        v = rest[:, start:start + k]
        projs.append(v @ v.conj().T)
        start += k
    pu = tuple(float(x) for x in _distinct_phases(blocks, rng))
    pv = tuple(float(x) for x in _distinct_phases(blocks, rng))
    w = rng.dirichlet([1, 1, 1])
    return MultiUnitary(p0, tuple(projs), pu, pv, d, float(w[1]), float(w[2]))


# -- the six worked examples --------------------------------------------------------

@dataclass(frozen=True)
class Example:
    name: str
    states: tuple[str, ...]
    expect_code: bool
    expect_lambda: float | None = None
    expect_local: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    d: int = 3

    def model(self, p: float = 0.5) -> HermitianUnitary:
        return HermitianUnitary.from_states([parse_ket(s, self.d) for s in self.states], self.d, p)


EXAMPLES: tuple[Example, ...] = (
    Example("q1-maximally-entangled", ("1/sqrt(3)(|00>+|11>+|22>)",), False),
    Example("q2-common-zero-row", ("1/sqrt(2)(|11>+|22>)", "1/sqrt(2)(|10>+|21>)"), False),
    Example("q2-cross-pairs", ("1/sqrt(2)(|02>+|10>)", "1/sqrt(2)(|01>+|20>)"), True, 1.0, ((1, 2), (1, 2))),
    Example("q3-swap", ("1/sqrt(2)(|01>-|10>)", "1/sqrt(2)(|12>-|21>)", "1/sqrt(2)(|02>-|20>)"), False),
    Example("q4-product", ("|00>", "|01>", "|10>", "|11>"), True, -1.0, ((0, 1), (0, 1))),
    Example("q4-not-product", ("1/sqrt(2)(|00>+|11>)", "|20>", "|21>", "|22>"), False),
)
