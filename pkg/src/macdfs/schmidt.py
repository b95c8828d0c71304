"""Pure bipartite states and their Schmidt (coefficient) matrices.

Basis ordering is fixed globally: amplitude of ``|k l>`` lives at index
``k * d2 + l``, which is exactly row-major reshaping into a ``d1 x d2``
matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ContractViolation, as_cmat, is_unitary, numerical_rank


@dataclass(frozen=True)
class PureState:
    d1: int
    d2: int
    amps: np.ndarray = field(repr=False)
    unnormalized: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).ravel()
        if amps.size != self.d1 * self.d2:
            raise ContractViolation(f"expected {self.d1 * self.d2} amplitudes, got {amps.size}")
        if not self.unnormalized and abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise ContractViolation("state is not normalized (pass unnormalized=True for span vectors)")
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "PureState":
        n = self.norm
        if n == 0:
            raise ContractViolation("cannot normalize the zero vector")
        return PureState(self.d1, self.d2, self.amps / n)

    @classmethod
    def basis(cls, d1: int, d2: int, k: int, l: int) -> "PureState":
        amps = np.zeros(d1 * d2, dtype=complex)
        amps[k * d2 + l] = 1.0
        return cls(d1, d2, amps)


def to_schmidt(s: PureState) -> np.ndarray:
    return s.amps.reshape(s.d1, s.d2).copy()


def from_schmidt(c, unnormalized: bool | None = None) -> PureState:
    c = as_cmat(c)
    if unnormalized is None:
        unnormalized = abs(np.linalg.norm(c) - 1.0) > 1e-12
    return PureState(c.shape[0], c.shape[1], c.ravel().copy(), unnormalized=unnormalized)


def overlap(a: PureState, b: PureState) -> complex:
    """<a|b> computed as tr(C_a^H C_b)."""
    if (a.d1, a.d2) != (b.d1, b.d2):
        raise ContractViolation("dimension mismatch")
    ca, cb = to_schmidt(a), to_schmidt(b)
    return complex(np.trace(ca.conj().T @ cb))


def local_rotate(s: PureState, u1, u2) -> PureState:
    """Apply ``u1 (x) u2``; on Schmidt matrices this is ``C -> u1 C u2^T``."""
    u1, u2 = as_cmat(u1), as_cmat(u2)
    if u1.shape != (s.d1, s.d1) or u2.shape != (s.d2, s.d2):
        raise ContractViolation("local unitaries have wrong shape")
    if not (is_unitary(u1) and is_unitary(u2)):
        raise ContractViolation("local operators must be unitary")
    c = u1 @ to_schmidt(s) @ u2.T
    return PureState(s.d1, s.d2, c.ravel(), unnormalized=s.unnormalized)


def schmidt_rank(s: PureState) -> int:
    return numerical_rank(to_schmidt(s))


def schmidt_coefficients(s: PureState) -> np.ndarray:
    return np.linalg.svd(to_schmidt(s), compute_uv=False)
