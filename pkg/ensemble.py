"""
Exact formulas for the truncated orthogonal ensemble.

M_{2n} is the top-left 2n×2n block of a Haar orthogonal matrix of size
(2n+ℓ)×(2n+ℓ). Everything here is driven by the n×n matrices

    H_pq = B(p+q+½, ℓ) / (2^{ℓ−1} Γ²(ℓ/2)),     D_pp = √(Γ(2p+ℓ)/Γ(2p+1)),

through det(I − (1−e^{2s}) D H D), which generates the number of real
eigenvalues. The all-real probability has its own Barnes-G closed form.
"""
import logging
import math
from functools import lru_cache
from typing import Tuple

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.special import betaln, gammaln

from densela import elementary_symmetric, sym_eigen, sym_eigen_mp, sym_logdet_cholesky
from errors import DomainError, SpectralRadiusExceeded
from specfun import LogValue, log_barnes_g_ratio, log_volume_orthogonal

logger = logging.getLogger("orthopersist.ensemble")

# Up to this n the distribution is computed from a raised-precision spectrum.
MP_DISTRIBUTION_MAX_N = 32


# ── Pydantic models ────────────────────────────────────────────────────────
class EnsembleParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="half the matrix size 2n")
    ell: int = Field(..., ge=1, description="truncation rank")


class RealCountDistribution(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: EnsembleParams
    probs: Tuple[float, ...]

    def mean(self) -> float:
        return float(sum(2 * k * p for k, p in enumerate(self.probs)))


def make_params(n: int, ell: int) -> EnsembleParams:
    try:
        return EnsembleParams(n=n, ell=ell)
    except ValidationError as e:
        raise DomainError(f"invalid ensemble parameters n={n}, ell={ell}") from e


# ── Matrices ──────────────────────────────────────────────────────────────
def hankel_matrix(params: EnsembleParams) -> np.ndarray:
    idx = np.arange(params.n, dtype=float)
    pq = idx[:, None] + idx[None, :]
    ell = params.ell
    log_h = betaln(pq + 0.5, ell) - (ell - 1) * math.log(2.0) - 2.0 * gammaln(0.5 * ell)
    return np.exp(log_h)


def weight_diag(params: EnsembleParams) -> np.ndarray:
    p = np.arange(params.n, dtype=float)
    return np.exp(0.5 * (gammaln(2 * p + params.ell) - gammaln(2 * p + 1)))


def dhd(params: EnsembleParams) -> np.ndarray:
    d = weight_diag(params)
    M = d[:, None] * hankel_matrix(params) * d[None, :]
    return 0.5 * (M + M.T)


def _dhd_mp(params: EnsembleParams) -> mpmath.matrix:
    """D H D with entries at the current mpmath precision."""
    ell = params.ell
    scale = mpmath.mpf(2) ** (ell - 1) * mpmath.gamma(mpmath.mpf(ell) / 2) ** 2
    d = [mpmath.sqrt(mpmath.gamma(2 * p + ell) / mpmath.gamma(2 * p + 1)) for p in range(params.n)]
    M = mpmath.matrix(params.n, params.n)
    for p in range(params.n):
        for q in range(p, params.n):
            value = d[p] * d[q] * mpmath.beta(p + q + mpmath.mpf(1) / 2, ell) / scale
            M[p, q] = value
            M[q, p] = value
    return M


def spectral_radius(params: EnsembleParams) -> float:
    """Largest eigenvalue of D H D (the matrix is positive definite)."""
    return float(sym_eigen(dhd(params)).max)


# ── Probabilities ─────────────────────────────────────────────────────────
def log_p_no_real(params: EnsembleParams) -> float:
    n = params.n
    return sym_logdet_cholesky(np.eye(n) - dhd(params))


def p_no_real(params: EnsembleParams) -> float:
    """P(M_{2n} has no real eigenvalue) = det(I − DHD)."""
    return math.exp(log_p_no_real(params))


def mgf(params: EnsembleParams, s: float) -> float:
    """E[e^{s 𝒩}] = Π_j (1 − (1−e^{2s}) λ_j) over the spectrum of DHD."""
    if not math.isfinite(s):
        raise DomainError(f"mgf requires a finite s, got {s}")
    lam = sym_eigen(dhd(params)).values
    return float(np.exp(np.sum(np.log1p(math.expm1(2.0 * s) * lam))))


@lru_cache(maxsize=128)
def real_count_distribution(params: EnsembleParams) -> RealCountDistribution:
    """
    P(𝒩 = 2k), k = 0..n, as the coefficients of Π_j (1 − λ_j + tλ_j) in t.

    For n up to MP_DISTRIBUTION_MAX_N the spectrum is computed at
    30 + 2n digits; the smallest eigenvalues of DHD decay geometrically and
    fix the all-real tail.
    """
    n = params.n
    if n <= MP_DISTRIBUTION_MAX_N:
        dps = 30 + 2 * n
        with mpmath.workdps(dps):
            lam = sym_eigen_mp(_dhd_mp(params), dps).values
            if lam[-1] >= 1:
                raise SpectralRadiusExceeded(
                    f"largest eigenvalue of DHD is {mpmath.nstr(lam[-1], 17)} >= 1 at n={n}, ell={params.ell}"
                )
            lam_sum = mpmath.fsum(lam)
            scale = mpmath.fprod([1 - x for x in lam])
            e = elementary_symmetric(np.array([x / (1 - x) for x in lam], dtype=object))
            probs = [float(scale * ek) for ek in e]
        logger.debug(f"distribution n={n} ell={params.ell}: dps={dps}, tr(DHD)={float(lam_sum):.17g}")
    else:
        lam = sym_eigen(dhd(params)).values
        if lam[-1] >= 1:
            raise SpectralRadiusExceeded(
                f"largest eigenvalue of DHD is {lam[-1]:.17g} >= 1 at n={n}, ell={params.ell}"
            )
        if lam[0] < 0:
            logger.warning(f"clipping {np.count_nonzero(lam < 0)} negative rounding-level eigenvalues of DHD at n={n}")
            lam = np.clip(lam, 0.0, None)
        scale = math.exp(float(np.sum(np.log1p(-lam))))
        probs = [float(v) for v in scale * elementary_symmetric(lam / (1.0 - lam))]
    return RealCountDistribution(params=params, probs=tuple(probs))


def p_all_real(params: EnsembleParams) -> LogValue:
    """
    P(all 2n eigenvalues real) as a product of Barnes-G ratios,

        Π_{a ∈ {ℓ/2, (ℓ+1)/2, ℓ}} G(n+a)/G(a) · G(n+ℓ−½)/G(2n+ℓ−½) · Γ(ℓ/2)^{−2n},

    kept in log space since it decays like e^{−cn²}.
    """
    n, ell = params.n, params.ell
    result = LogValue.from_log(-2 * n * float(gammaln(0.5 * ell)))
    for a in (0.5 * ell, 0.5 * (ell + 1), float(ell)):
        result = result * LogValue.from_log(log_barnes_g_ratio(n, a))
    return result / LogValue.from_log(log_barnes_g_ratio(n, n + ell - 0.5))


def log_p_all_real(params: EnsembleParams) -> float:
    """ln P(all 2n eigenvalues real)."""
    return p_all_real(params).log_abs


def expected_real_count(params: EnsembleParams) -> float:
    """E[𝒩] = 2 tr(DHD), the derivative of the MGF at s = 0."""
    return float(2.0 * np.trace(dhd(params)))


def log_det_alpha(n: int, alpha: float) -> float:
    """ln det(I − αH_n) for the ℓ = 1 (shifted Hilbert) matrix, |α| ≤ 1."""
    if not -1.0 <= alpha <= 1.0:
        raise DomainError(f"log_det_alpha requires |alpha| <= 1, got {alpha}")
    H = hankel_matrix(make_params(n, 1))
    return sym_logdet_cholesky(np.eye(n) - alpha * H)


def log_density_constant(params: EnsembleParams) -> float:
    """
    ln C_N of the joint eigenvalue density, N = 2n:
    C_N = v_ℓ v_N / v_{N+ℓ} · ((2π)^ℓ / ℓ!)^{N/2}.
    """
    N, ell = 2 * params.n, params.ell
    return (
        log_volume_orthogonal(ell)
        + log_volume_orthogonal(N)
        - log_volume_orthogonal(N + ell)
        + 0.5 * N * (ell * math.log(2 * math.pi) - float(gammaln(ell + 1)))
    )
