"""
Diagonalization of the infinite shifted Hilbert matrix H_lk = 1/(π(l+k+½)).

The eigenfunctions are

    P̂_l(x²) = (½)_l / l! · ₄F₃(−l, l+½, ix/2, −ix/2; ¼, ½, ¾; 1),

orthonormal for ρ(x) = 2 sech(πx) on (0, ∞), and H acts on them as
multiplication by sech(πx). The ₄F₃ series alternates with terms of size
~4^l, so values are produced by the three-term recurrence of these Wilson
polynomials,

    (n+½)² F_{n+1} = ((n+½)² + n² − x²) F_n − n² F_{n−1},   F_0 = 1,

and the series itself is kept as a raised-precision oracle.
"""
import logging
import math
from typing import List, Literal

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammaln, loggamma

from densela import sym_eigen
from ensemble import hankel_matrix, make_params
from errors import DomainError
from quadrature import composite_gauss_legendre, exp_sinh

logger = logging.getLogger("orthopersist.hilbert")

HATP_MAX_L = 5000
HATP_MAX_X = 50.0
# zero-crossing scans run the scalar recurrence only and may go past HATP_MAX_L
ZERO_CROSSING_MAX_L = 1_000_000
EIGEN_TRACE_MAX_N = 512


class HatP(BaseModel):
    model_config = ConfigDict(frozen=True)

    l: int = Field(..., ge=0, le=HATP_MAX_L)

    @property
    def log_prefactor(self) -> float:
        """ln((½)_l / l!), equal to ln(4^l (¼)_l (½)_l (¾)_l / (l! (½)_{2l}))."""
        return float(gammaln(self.l + 0.5) - gammaln(0.5) - gammaln(self.l + 1))

    def __call__(self, x):
        return hatP_eval(self.l, x)

    def series_terms(self, x: float, dps: int = 50) -> List[mpmath.mpf]:
        """Terms of the ₄F₃ series at x, without the prefactor."""
        l = self.l
        with mpmath.workdps(dps):
            x2 = mpmath.mpf(x) ** 2 / 4
            term = mpmath.mpf(1)
            terms = [term]
            for j in range(l):
                term *= (j - l) * (l + j + mpmath.mpf(1) / 2) * (j * j + x2)
                term /= (j + mpmath.mpf(1) / 4) * (j + mpmath.mpf(1) / 2) * (j + mpmath.mpf(3) / 4) * (j + 1)
                terms.append(term)
        return terms


# ── Eigenfunctions ────────────────────────────────────────────────────────
def hatP_sequence(l_max: int, x) -> np.ndarray:
    """P̂_0(x²) .. P̂_{l_max}(x²); shape (l_max+1,) + shape(x)."""
    if l_max < 0:
        raise DomainError(f"l_max must be >= 0, got {l_max}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        # plain floats: long scalar runs (zero-crossing scans) stay fast
        x2 = float(x) ** 2
        seq = [1.0, 1.0 - 4.0 * x2][: l_max + 1]
        for n in range(1, l_max):
            a = (n + 0.5) ** 2
            seq.append(((a + n * n - x2) * seq[n] - n * n * seq[n - 1]) / a)
        F = np.array(seq)
    else:
        x2 = x * x
        F = np.empty((l_max + 1,) + x.shape)
        F[0] = 1.0
        if l_max >= 1:
            F[1] = 1.0 - 4.0 * x2
        for n in range(1, l_max):
            a = (n + 0.5) ** 2
            F[n + 1] = ((a + n * n - x2) * F[n] - n * n * F[n - 1]) / a
    l = np.arange(l_max + 1, dtype=float)
    norm = np.exp(gammaln(l + 0.5) - gammaln(0.5) - gammaln(l + 1))
    return F * norm.reshape((-1,) + (1,) * x.ndim)


def hatP_eval(l: int, x, method: Literal["recurrence", "series"] = "recurrence"):
    """P̂_l(x²)."""
    if not 0 <= l <= HATP_MAX_L:
        raise DomainError(f"hatP_eval requires 0 <= l <= {HATP_MAX_L}, got {l}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(x_arr > HATP_MAX_X):
        raise DomainError(f"hatP_eval requires 0 <= x <= {HATP_MAX_X}, got {x}")
    if method == "series":
        if x_arr.ndim != 0:
            return np.array([hatP_eval(l, float(v), "series") for v in x_arr.ravel()]).reshape(x_arr.shape)
        # the series loses about log10(4^l) digits to cancellation
        dps = 30 + int(0.7 * l + 1.4 * float(x_arr))
        hp = HatP(l=l)
        with mpmath.workdps(dps):
            total = mpmath.fsum(hp.series_terms(float(x_arr), dps))
            return float(total * mpmath.exp(hp.log_prefactor))
    values = hatP_sequence(l, x_arr)[l]
    return float(values) if values.ndim == 0 else values


def rho(x):
    """2 sech(πx), written as 4e^{−πx}/(1+e^{−2πx})."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-math.pi * np.abs(x))
    value = 4.0 * e / (1.0 + e * e)
    return float(value) if value.ndim == 0 else value


def moment_mu(m: int) -> float:
    """μ_m = (1/π) ∫₀^∞ sech^m(πu) du."""
    if m < 1:
        raise DomainError(f"moment_mu requires m >= 1, got {m}")
    rule = exp_sinh(0.0, h=1.0 / 64)
    return rule.integrate(lambda u: (0.5 * rho(u)) ** m) / math.pi


def trace_power(n: int, m: int) -> float:
    """Tr(H_n^m) for the n×n shifted Hilbert matrix."""
    if n < 1 or m < 1:
        raise DomainError(f"trace_power requires n, m >= 1, got ({n}, {m})")
    H = hankel_matrix(make_params(n, 1))
    if m == 1:
        return float(np.trace(H))
    if n <= EIGEN_TRACE_MAX_N:
        return float(np.sum(sym_eigen(H).values ** m))
    half = np.linalg.matrix_power(H, m // 2)
    if m % 2 == 0:
        return float(np.sum(half * half))
    # Tr(A B) = Σ A∘B for symmetric A, B
    return float(np.sum(half * (half @ H)))


def asymptotic_phase(x: float) -> float:
    """arg Γ(ix) − arg Γ(2ix) + 4x ln 2, the phase of P̂_l(x²) against x ln l."""
    if x == 0:
        return 0.0
    return float(np.imag(loggamma(1j * x)) - np.imag(loggamma(2j * x)) + 4.0 * x * math.log(2.0))


def hatP_asymptotic(l: int, x: float) -> float:
    """√(cosh(πx)/(πl)) cos(x ln l + asymptotic_phase(x))."""
    if l < 2:
        raise DomainError(f"hatP_asymptotic requires l >= 2, got {l}")
    if x < 0:
        raise DomainError(f"hatP_asymptotic requires x >= 0, got {x}")
    return math.sqrt(math.cosh(math.pi * x) / (math.pi * l)) * math.cos(x * math.log(l) + asymptotic_phase(x))


def hatP_zero_crossings(x: float, l_min: int, l_max: int) -> List[int]:
    """Indices l in (l_min, l_max] where P̂_l(x²) has the opposite sign of P̂_{l−1}(x²)."""
    if not 0 <= l_min < l_max:
        raise DomainError(f"need 0 <= l_min < l_max, got ({l_min}, {l_max})")
    if l_max > ZERO_CROSSING_MAX_L:
        raise DomainError(f"hatP_zero_crossings requires l_max <= {ZERO_CROSSING_MAX_L}, got {l_max}")
    if not 0 <= x <= HATP_MAX_X:
        raise DomainError(f"hatP_zero_crossings requires 0 <= x <= {HATP_MAX_X}, got {x}")
    values = hatP_sequence(l_max, x)[l_min:]
    flips = np.nonzero(np.signbit(values[1:]) != np.signbit(values[:-1]))[0]
    return [int(l_min + i + 1) for i in flips]


# ── Checks of the diagonalization ─────────────────────────────────────────
def unitarity_defect(l: int, m: int) -> float:
    """|∫₀^∞ P̂_l P̂_m ρ dx − δ_lm|."""
    if l < 0 or m < 0:
        raise DomainError(f"unitarity_defect requires l, m >= 0, got ({l}, {m})")
    # past the last zero the integrand decays like x^{2(l+m)} e^{−πx}
    x_cut = 40.0 + 5.0 * (l + m)
    rule = composite_gauss_legendre(0.0, x_cut, panels=int(2 * x_cut), order=16)
    top = max(l, m)

    def integrand(x):
        P = hatP_sequence(top, x)
        return P[l] * P[m] * rho(x)

    value = rule.integrate(integrand)
    return abs(value - (1.0 if l == m else 0.0))


def multiplication_defect(l: int, x: float, K: int) -> float:
    """|Σ_{k<K} H_lk P̂_k(x²) − sech(πx) P̂_l(x²)|."""
    if K < l + 10:
        raise DomainError(f"multiplication_defect requires K >= l + 10, got K={K}, l={l}")
    P = hatP_sequence(K - 1, x)
    k = np.arange(K, dtype=float)
    row = 1.0 / (math.pi * (l + k + 0.5))
    return abs(float(np.dot(row, P)) - 0.5 * rho(x) * float(P[l]))


def log_det_upper_bound(n: int, M: int) -> float:
    """−Σ_{m≤M} Tr(H_n^m)/m; every omitted term of the log series is negative."""
    if M < 1:
        raise DomainError(f"log_det_upper_bound requires M >= 1, got {M}")
    return -math.fsum(trace_power(n, m) / m for m in range(1, M + 1))
