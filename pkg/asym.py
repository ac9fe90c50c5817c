"""
Asymptotic constants: the persistence exponent θ = 3/16 and its rank-ℓ
generalization θ(ℓ), the large-ℓ conjecture, φ(α) for the all-real
probability, and the log n coefficients of det(I − αH_n) and of the log-MGF.
"""
import logging
import math
from typing import Literal

import numpy as np
from pydantic import BaseModel

from errors import DomainError
from quadrature import exp_sinh, integrate_with_error, tanh_sinh
from specfun import riemann_zeta_3_2

logger = logging.getLogger("orthopersist.asym")

THETA_ELL_MAX = 10_000
QUADRATURE_H = 1.0 / 32
LN2 = math.log(2.0)

FormulaId = Literal["theta", "theta_ell", "theta_large_ell", "phi", "mgf_coeff", "alpha_det_coeff"]


# ── Pydantic models ────────────────────────────────────────────────────────
class ExponentReport(BaseModel):
    value: float
    quadrature_error: float
    formula_id: FormulaId


# ── Stable elementary pieces ──────────────────────────────────────────────
def _log_cosh(y: np.ndarray) -> np.ndarray:
    small = y < 1.0
    ys = np.where(small, y, 0.0)
    yl = np.where(small, 1.0, y)
    return np.where(small, np.log1p(2.0 * np.sinh(0.5 * ys) ** 2), yl + np.log1p(np.exp(-2.0 * yl)) - LN2)


def _log_sinhc(y: np.ndarray) -> np.ndarray:
    """ln(sinh(y)/y)."""
    small = y < 0.5
    ys = np.where(small, y, 0.0)
    yl = np.where(small, 1.0, y)
    y2 = ys * ys
    series = y2 / 6.0 * (1.0 + y2 / 20.0 * (1.0 + y2 / 42.0 * (1.0 + y2 / 72.0 * (1.0 + y2 / 110.0))))
    large = yl + np.log1p(-np.exp(-2.0 * yl)) - LN2 - np.log(yl)
    return np.where(small, np.log1p(series), large)


def log_gamma_modulus_ratio(ell: int, x) -> np.ndarray:
    """
    ln(|Γ(ℓ/2 + ix)|² / Γ(ℓ/2)²) for integer ℓ.

    Starts from |Γ(½+ix)|² = π/cosh(πx) or |Γ(1+ix)|² = πx/sinh(πx) and climbs
    with |Γ(a+1+ix)|² = (a² + x²)|Γ(a+ix)|².
    """
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    x = np.asarray(x, dtype=float)
    y = math.pi * np.abs(x)
    if ell % 2 == 1:
        base, value = 0.5, -_log_cosh(y)
    else:
        base, value = 1.0, -_log_sinhc(y)
    steps = ell // 2 - (0 if ell % 2 == 1 else 1)
    if steps > 0:
        a = base + np.arange(steps, dtype=float)
        value = value + np.sum(np.log1p((x[..., None] / a) ** 2), axis=-1)
    return value


def _log_one_minus(log_r: np.ndarray) -> np.ndarray:
    return np.log(-np.expm1(log_r))


# ── Exponents ─────────────────────────────────────────────────────────────
def _half_line_integral(f, split: float):
    head, head_err = integrate_with_error(f, lambda h: tanh_sinh(0.0, split, h), QUADRATURE_H)
    tail, tail_err = integrate_with_error(f, lambda h: exp_sinh(split, h), QUADRATURE_H)
    return head + tail, head_err + tail_err


def theta() -> ExponentReport:
    """θ = −(1/2π) ∫₀^∞ ln(1 − sech(πu)) du = 3/16."""

    def integrand(u):
        y = math.pi * u
        # ln(1 − sech y) = ln 2 + 2 ln sinh(y/2) − ln cosh y, log1p form past y = 1
        small = y < 1.0
        ys = np.where(small, y, 1.0)
        yl = np.where(small, 1.0, y)
        near = LN2 + 2.0 * np.log(np.sinh(0.5 * ys)) - _log_cosh(ys)
        e = np.exp(-yl)
        far = np.log1p(-2.0 * e / (1.0 + e * e))
        return np.where(small, near, far)

    integral, err = _half_line_integral(integrand, 0.5)
    report = ExponentReport(value=-integral / (2.0 * math.pi), quadrature_error=err / (2.0 * math.pi), formula_id="theta")
    logger.debug(f"theta = {report.value:.17g} (err {report.quadrature_error:.1e})")
    return report


def theta_ell(ell: int) -> ExponentReport:
    """θ(ℓ) = −(1/2π) ∫₀^∞ ln(1 − |Γ(ℓ/2+ix)|²/Γ(ℓ/2)²) dx."""
    if not 1 <= ell <= THETA_ELL_MAX:
        raise DomainError(f"theta_ell requires 1 <= ell <= {THETA_ELL_MAX}, got {ell}")
    # the integrand varies on the scale √ℓ
    split = max(0.5, 0.5 * math.sqrt(ell))
    integral, err = _half_line_integral(lambda x: _log_one_minus(log_gamma_modulus_ratio(ell, x)), split)
    report = ExponentReport(value=-integral / (2.0 * math.pi), quadrature_error=err / (2.0 * math.pi),
                            formula_id="theta_ell")
    logger.debug(f"theta({ell}) = {report.value:.17g} (err {report.quadrature_error:.1e})")
    return report


def theta_large_ell(ell: float) -> float:
    """¼ √(ℓ/2π) ζ(3/2)."""
    if ell < 1:
        raise DomainError(f"theta_large_ell requires ell >= 1, got {ell}")
    return 0.25 * math.sqrt(ell / (2.0 * math.pi)) * riemann_zeta_3_2()


def phi(alpha: float) -> float:
    """
    Leading coefficient of ln P(all real) / n² at ℓ = αn:

        φ(α) = −ln2 − α(1+3α/4)lnα − α/2 + (1+α)²ln(1+α) − (1+α/2)²ln(2+α).

    The lnα terms cancel exactly and are removed before evaluation.
    """
    if not alpha > 0 or not math.isfinite(alpha):
        raise DomainError(f"phi requires a finite alpha > 0, got {alpha}")
    return (
        -LN2
        - 0.5 * alpha
        + (1.0 + alpha) ** 2 * math.log1p(1.0 / alpha)
        - (1.0 + 0.5 * alpha) ** 2 * math.log1p(2.0 / alpha)
    )


def mgf_log_coefficient(s: float) -> float:
    """1/8 − (2/π²) arccos²(e^s/√2), the log n coefficient of ln E[e^{s𝒩}]."""
    if s > 0.5 * LN2 + 1e-15:
        raise DomainError(f"mgf_log_coefficient requires s <= ln(2)/2, got {s}")
    arg = min(math.exp(s) / math.sqrt(2.0), 1.0)
    return 0.125 - 2.0 / math.pi ** 2 * math.acos(arg) ** 2


def alpha_det_coefficient(alpha: float) -> float:
    """−(1/2π²)(arcsin²α + π arcsin α), the log n coefficient of ln det(I − αH_n)."""
    if not -1.0 <= alpha <= 1.0:
        raise DomainError(f"alpha_det_coefficient requires |alpha| <= 1, got {alpha}")
    a = math.asin(alpha)
    return -(a * a + math.pi * a) / (2.0 * math.pi ** 2)
