"""
Dense real linear algebra.

Log-determinants through Cholesky, symmetric spectra (LAPACK or mpmath at
raised precision), real Schur eigenvalues with exact real/complex
classification, and elementary symmetric polynomials.
"""
import logging
from typing import List, Sequence

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import linalg

from errors import DomainError, NoConvergence, NonSquare, NotPositiveDefinite

logger = logging.getLogger("orthopersist.densela")

# Row-major real matrices are plain float64 ndarrays throughout the package.
DenseMatrix = np.ndarray


class Spectrum(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray

    @field_validator("values")
    @classmethod
    def _ascending(cls, values: np.ndarray) -> np.ndarray:
        if np.any(np.diff(values) < 0):
            raise ValueError("Spectrum values must be sorted ascending")
        return values

    def __len__(self) -> int:
        return len(self.values)

    @property
    def max(self):
        return self.values[-1]


class EigenList(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pairs: np.ndarray  # complex, real entries have imag exactly 0
    real_count: int = Field(..., ge=0)

    @property
    def real_values(self) -> np.ndarray:
        return self.pairs.real[self.pairs.imag == 0]


def _square(A, name: str) -> np.ndarray:
    arr = np.asarray(A, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"{name} requires a square matrix, got shape {arr.shape}")
    return arr


# ── Determinants ──────────────────────────────────────────────────────────
def sym_logdet_cholesky(A: DenseMatrix) -> float:
    """ln det A = 2 Σ ln L_ii for symmetric positive definite A."""
    arr = _square(A, "sym_logdet_cholesky")
    try:
        L = np.linalg.cholesky(arr)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(
            f"matrix of size {arr.shape[0]} is not positive definite (spectral radius of DHD >= 1?)"
        ) from e
    return float(2.0 * np.sum(np.log(np.diag(L))))


# ── Symmetric spectra ─────────────────────────────────────────────────────
def sym_eigen(A: DenseMatrix) -> Spectrum:
    """All eigenvalues of a symmetric matrix, ascending (LAPACK syevd)."""
    arr = _square(A, "sym_eigen")
    return Spectrum(values=np.linalg.eigvalsh(arr))


def sym_eigen_mp(A, dps: int) -> Spectrum:
    """
    Symmetric eigenvalues at ``dps`` decimal digits of working precision.

    ``A`` may hold mpmath numbers; the returned values are mpf, ascending.
    """
    with mpmath.workdps(dps):
        M = mpmath.matrix(A.tolist() if isinstance(A, np.ndarray) else A)
        if M.rows != M.cols:
            raise NonSquare(f"sym_eigen_mp requires a square matrix, got {M.rows}x{M.cols}")
        E = mpmath.eigsy(M, eigvals_only=True)
        values = sorted(E[i] for i in range(M.rows))
    return Spectrum(values=np.array(values, dtype=object))


# ── Real Schur ────────────────────────────────────────────────────────────
def real_eigen_schur(A: DenseMatrix) -> EigenList:
    """
    Eigenvalues of a real square matrix with structural real/complex split.

    The matrix is balanced and reduced to real quasi-triangular form. A 1×1
    block is a real eigenvalue; a 2×2 block is a conjugate pair when its
    discriminant is negative, otherwise two reals.
    """
    arr = _square(A, "real_eigen_schur")
    if not np.all(np.isfinite(arr)):
        raise DomainError("real_eigen_schur requires finite entries")
    dim = arr.shape[0]
    balanced, _ = linalg.matrix_balance(arr, permute=True, scale=True)
    try:
        T, _ = linalg.schur(balanced, output="real")
    except (linalg.LinAlgError, ValueError) as e:
        raise NoConvergence(f"real Schur iteration failed for a {dim}x{dim} matrix: {e}") from e

    eigs: List[complex] = []
    real_count = 0
    i = 0
    while i < dim:
        if i == dim - 1 or T[i + 1, i] == 0.0:
            eigs.append(complex(T[i, i], 0.0))
            real_count += 1
            i += 1
            continue
        a, b, c, d = T[i, i], T[i, i + 1], T[i + 1, i], T[i + 1, i + 1]
        half_trace = 0.5 * (a + d)
        disc = (0.5 * (a - d)) ** 2 + b * c
        if disc < 0:
            im = np.sqrt(-disc)
            eigs.extend([complex(half_trace, im), complex(half_trace, -im)])
        else:
            root = np.sqrt(disc)
            eigs.extend([complex(half_trace + root, 0.0), complex(half_trace - root, 0.0)])
            real_count += 2
        i += 2
    return EigenList(pairs=np.array(eigs, dtype=complex), real_count=real_count)


def real_eigen_count_batch(stack: np.ndarray) -> np.ndarray:
    """
    Real eigenvalue counts for a stack of shape (B, d, d).

    LAPACK standardizes the 2×2 Schur blocks so that real eigenvalues come back
    with an imaginary part of exactly zero; no tolerance is involved.
    """
    arr = np.asarray(stack, dtype=float)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise NonSquare(f"real_eigen_count_batch requires shape (B, d, d), got {arr.shape}")
    try:
        eigs = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as e:
        raise NoConvergence(f"batched eigenvalue iteration failed: {e}") from e
    return np.count_nonzero(eigs.imag == 0, axis=-1)


# ── Elementary symmetric polynomials ──────────────────────────────────────
def elementary_symmetric(values: Sequence) -> np.ndarray:
    """
    e_0..e_n of the given values by e_k ← e_k + x_j e_{k−1}.

    Works on floats and on mpmath numbers (object arrays) alike.
    """
    arr = np.asarray(values)
    dtype = object if arr.dtype == object else float
    e = np.zeros(len(arr) + 1, dtype=dtype)
    e[0] = 1
    for j, x in enumerate(arr):
        # right-hand side is evaluated before the in-place update
        e[1:j + 2] = e[1:j + 2] + x * e[0:j + 1]
    return e


def char_poly_det(A: DenseMatrix, lam: float) -> float:
    """det(A − λI) by LU, used to validate returned eigenvalues."""
    arr = _square(A, "char_poly_det")
    return float(linalg.det(arr - lam * np.eye(arr.shape[0])))


def lu_det(A: DenseMatrix) -> float:
    return float(linalg.det(_square(A, "lu_det")))
