"""The span of a list of equally shaped complex matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .linalg import ContractViolation, get_tolerance, numerical_rank


@dataclass(frozen=True)
class MatrixSpace:
    """Span of ``basis[i]`` (shape ``dims``); the basis need not be independent."""

    dims: tuple[int, int]
    basis: np.ndarray = field(repr=False)  # (q, a, b)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        a_, b_ = self.dims
        if b.size == 0:
            b = np.zeros((0, a_, b_), dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (a_, b_):
            raise ContractViolation(f"basis elements must all have shape {self.dims}")
        if not np.all(np.isfinite(b)):
            raise ContractViolation("basis has non-finite entries")
        norms = np.linalg.norm(b.reshape(b.shape[0], a_ * b_), axis=1)
        b = b[norms > get_tolerance().rank_abs]
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "dims", (int(a_), int(b_)))

    @classmethod
    def from_matrices(cls, mats: Iterable, dims: tuple[int, int] | None = None) -> "MatrixSpace":
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if dims is None:
            if not mats:
                raise ContractViolation("dims required for an empty basis")
            dims = mats[0].shape
        return cls(tuple(dims), np.array(mats, dtype=complex).reshape(len(mats), *dims))

    def __len__(self) -> int:
        return self.basis.shape[0]

    def __iter__(self):
        return iter(self.basis)

    @property
    def is_square(self) -> bool:
        return self.dims[0] == self.dims[1]

    @property
    def d(self) -> int:
        if not self.is_square:
            raise ContractViolation("space of non-square matrices")
        return self.dims[0]

    def vectorized(self) -> np.ndarray:
        """(a*b) x q matrix whose columns are the row-major flattened basis."""
        return self.basis.reshape(len(self), self.dims[0] * self.dims[1]).T

    @property
    def effective_dim(self) -> int:
        if len(self) == 0:
            return 0
        return numerical_rank(self.vectorized())

    @property
    def max_norm(self) -> float:
        if len(self) == 0:
            return 0.0
        return float(max(np.linalg.norm(m) for m in self.basis))

    def orthonormal(self) -> "MatrixSpace":
        """Same span, Frobenius-orthonormal and linearly independent basis."""
        if len(self) == 0:
            return self
        vec = self.vectorized()
        r = numerical_rank(vec)
        u, _, _ = np.linalg.svd(vec, full_matrices=False)
        return MatrixSpace(self.dims, u[:, :r].T.reshape(r, *self.dims))

    def combine(self, coeffs: Sequence[complex]) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=1)

    def transformed(self, left, right) -> "MatrixSpace":
        left, right = np.asarray(left, dtype=complex), np.asarray(right, dtype=complex)
        mats = left[None] @ self.basis @ right[None]
        return MatrixSpace((left.shape[0], right.shape[1]), mats)

    def transposed(self) -> "MatrixSpace":
        return MatrixSpace((self.dims[1], self.dims[0]), np.swapaxes(self.basis, 1, 2))

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        c = rng.normal(size=len(self)) + 1j * rng.normal(size=len(self))
        return self.combine(c / np.linalg.norm(c))
