"""
Pfaffians of real skew-symmetric matrices.

``pfaffian`` is a Parlett–Reid skew tridiagonalization with symmetric partial
pivoting. ``checkerboard_pfaffian`` covers the special case where every entry
between indices of equal parity vanishes; the Pfaffian is then an ordinary
determinant of the odd/even block.
"""
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import linalg

from errors import DomainError, NonSquare, PatternViolation


class SkewMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., ge=0)
    data: np.ndarray  # strict upper triangle, row-major

    @model_validator(mode="after")
    def _triangle_size(self) -> "SkewMatrix":
        expected = self.dim * (self.dim - 1) // 2
        if len(self.data) != expected:
            raise ValueError(f"SkewMatrix of dim {self.dim} needs {expected} entries, got {len(self.data)}")
        return self

    @classmethod
    def from_dense(cls, A) -> "SkewMatrix":
        """Keep the strict upper triangle of ``A``; the lower one is implied."""
        arr = np.asarray(A, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise NonSquare(f"SkewMatrix requires a square matrix, got shape {arr.shape}")
        iu = np.triu_indices(arr.shape[0], k=1)
        return cls(dim=arr.shape[0], data=arr[iu].copy())

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.dim, self.dim))
        iu = np.triu_indices(self.dim, k=1)
        A[iu] = self.data
        return A - A.T


SkewLike = Union[SkewMatrix, np.ndarray]


def _dense(A: SkewLike) -> np.ndarray:
    if isinstance(A, SkewMatrix):
        return A.to_dense()
    return SkewMatrix.from_dense(A).to_dense()


def pfaffian(A: SkewLike) -> float:
    """Pf A; zero for odd dimension."""
    M = _dense(A)
    n = M.shape[0]
    if n % 2 == 1:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        # pivot: largest entry in column k below the diagonal
        kp = k + 1 + int(np.argmax(np.abs(M[k + 1:, k])))
        if kp != k + 1:
            M[[k + 1, kp], :] = M[[kp, k + 1], :]
            M[:, [k + 1, kp]] = M[:, [kp, k + 1]]
            pf = -pf
        if M[k + 1, k] == 0.0:
            return 0.0
        pf *= M[k, k + 1]
        if k + 2 < n:
            tau = M[k, k + 2:] / M[k, k + 1]
            col = M[k + 2:, k + 1]
            M[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def checkerboard_pfaffian(A: SkewLike, atol: float = 0.0) -> float:
    """
    Pf A = det {a_{2i, 2j+1}} for a checkerboard skew matrix.

    Entries a_ij with i ≡ j (mod 2) must vanish; ``atol`` relaxes "vanish" for
    matrices assembled by quadrature.
    """
    M = _dense(A)
    n = M.shape[0]
    if n % 2 == 1:
        raise DomainError(f"checkerboard_pfaffian requires even dimension, got {n}")
    parity = np.add.outer(np.arange(n), np.arange(n)) % 2 == 0
    offending = np.abs(M[parity])
    if offending.size and offending.max() > atol:
        raise PatternViolation(
            f"same-parity entry of size {offending.max():.3e} exceeds tolerance {atol:.1e}"
        )
    if n == 0:
        return 1.0
    return float(linalg.det(M[0::2, 1::2]))
