"""
Skew-orthogonal polynomials for the truncated orthogonal weight w_ℓ.

The monic family

    π_{2k}(z) = z^{2k},     π_{2k+1}(z) = z^{2k+1} − (2k/(2k+ℓ)) z^{2k−1}

is skew-orthogonal under (f, g) = (f, g)_ℝ + (f, g)_ℂ, where

    (f, g)_ℝ = ∫∫ w(x) w(y) f(x) g(y) sgn(y − x) dx dy
    (f, g)_ℂ = −2 ∫∫ Im(f(z) conj g(z)) w²(z) sgn(Im z) d²z.

Closed forms are provided for both the total and the real part; the
quadrature routines recompute them independently, and the Pfaffian ratio
Pf{(π_i, π_j)_ℂ} / Pf{(π_i, π_j)} reproduces P(no real eigenvalue).
"""
import logging
import math
from functools import lru_cache
from typing import Dict, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import betaln, gammaln

from ensemble import EnsembleParams
from errors import AccuracyBudget, DomainError
from pfaffian import SkewMatrix, checkerboard_pfaffian, pfaffian
from quadrature import gauss_legendre
from specfun import inc_beta

logger = logging.getLogger("orthopersist.skewortho")

DEFAULT_RULE_DENSITY = 200
QUADRATURE_MAX_DEGREE = 16
QUADRATURE_MAX_ELL = 4
RICHARDSON_TOLERANCE = 1e-6
CHECKERBOARD_TOLERANCE = 1e-9

Part = Literal["full", "real", "complex"]


class SkewPoly(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    ell: int = Field(..., ge=1)

    @property
    def parity(self) -> Literal["even", "odd"]:
        return "even" if self.index % 2 == 0 else "odd"

    def coefficients(self) -> Dict[int, float]:
        """Monomial degree -> coefficient."""
        k = self.index
        if k % 2 == 0 or k == 1:
            return {k: 1.0}
        m = (k - 1) // 2
        return {k: 1.0, k - 2: -2.0 * m / (2 * m + self.ell)}

    def __call__(self, z):
        return pi_eval(self.index, self.ell, z)


def pi_eval(k: int, ell: int, z):
    """π_k(z) for scalar or array z (real or complex)."""
    if k < 0:
        raise DomainError(f"polynomial index must be >= 0, got {k}")
    if k % 2 == 0:
        return z ** k
    m = (k - 1) // 2
    if m == 0:
        return z * 1
    return z ** k - (2.0 * m / (2 * m + ell)) * z ** (k - 2)


# ── Weight ────────────────────────────────────────────────────────────────
def _real_axis_constant(ell: int) -> float:
    """c_ℓ = ℓ! / (2^ℓ Γ²(ℓ/2)), so that w²(x) = c_ℓ (1−x²)^{ℓ−2} on (−1, 1)."""
    return math.exp(float(gammaln(ell + 1) - ell * math.log(2.0) - 2.0 * gammaln(0.5 * ell)))


def _weight_sq_parts(ell: int, one_minus_abs2, abs_one_minus_z2):
    """
    w²_ℓ from the structural quantities 1 − |z|² and |1 − z²|.

    Inside the disk, 1 − (2|Im z|/|1−z²|)² = ((1−|z|²)/|1−z²|)², so the inner
    integral of the weight is ½·B(v; (ℓ−1)/2, ½) with v that square.
    """
    one_minus_abs2 = np.asarray(one_minus_abs2, dtype=float)
    a = np.asarray(abs_one_minus_z2, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if ell == 1:
            w2 = 1.0 / (2.0 * math.pi * a)
        else:
            v = np.clip((one_minus_abs2 / a) ** 2, 0.0, 1.0)
            b = 0.5 * (ell - 1)
            inner = 0.5 * inc_beta(v, b, 0.5)
            w2 = ell * (ell - 1) / (2.0 * math.pi) * a ** (ell - 2) * inner
    return np.where(one_minus_abs2 < 0, 0.0, w2)


def weight_sq(ell: int, z) -> float:
    """w²_ℓ(z); zero outside the closed unit disk, +inf at z = ±1 when ℓ = 1."""
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    z = complex(z)
    one_minus_abs2 = 1.0 - abs(z) ** 2
    a = abs(1.0 - z * z)
    if one_minus_abs2 < 0:
        return 0.0
    if a == 0.0:
        return math.inf if ell == 1 else 0.0
    return float(_weight_sq_parts(ell, one_minus_abs2, a))


# ── Closed forms ──────────────────────────────────────────────────────────
def skew_product_closed(i: int, j: int, ell: int) -> float:
    """(π_i, π_j): ℓ!(2k)!/(2k+ℓ)! for (2k, 2k+1), antisymmetric, zero otherwise."""
    if i < 0 or j < 0:
        raise DomainError(f"indices must be >= 0, got ({i}, {j})")
    if i > j:
        return -skew_product_closed(j, i, ell)
    if i % 2 == 0 and j == i + 1:
        k = i // 2
        return math.exp(float(gammaln(ell + 1) + gammaln(2 * k + 1) - gammaln(2 * k + ell + 1)))
    return 0.0


def skew_product_real_closed(i: int, j: int, ell: int) -> float:
    """(π_{2p}, π_{2q+1})_ℝ = ℓ! B(p+q+½, ℓ) / (2^{ℓ−1} Γ²(ℓ/2) (2q+ℓ))."""
    if i < 0 or j < 0:
        raise DomainError(f"indices must be >= 0, got ({i}, {j})")
    if (i - j) % 2 == 0:
        return 0.0
    if i % 2 == 1:
        return -skew_product_real_closed(j, i, ell)
    p, q = i // 2, (j - 1) // 2
    log_value = (
        gammaln(ell + 1)
        + betaln(p + q + 0.5, ell)
        - (ell - 1) * math.log(2.0)
        - 2.0 * gammaln(0.5 * ell)
        - math.log(2 * q + ell)
    )
    return math.exp(float(log_value))


def eps_transform(k: int, ell: int, x, one_minus_x2=None):
    """
    ε[w π_k](x) = ½ ∫ sgn(y − x) w(y) π_k(y) dy on (−1, 1), in closed form.

    ``one_minus_x2`` may be passed when 1 − x² is known more accurately than
    it can be recomputed from x.
    """
    x = np.asarray(x, dtype=float)
    if one_minus_x2 is None:
        one_minus_x2 = 1.0 - x * x
    sqrt_c = math.sqrt(_real_axis_constant(ell))
    if k % 2 == 0:
        m = k // 2
        a = m + 0.5
        return -0.5 * sqrt_c * np.sign(x) * inc_beta(np.clip(x * x, 0.0, 1.0), a, 0.5 * ell)
    m = (k - 1) // 2
    return sqrt_c * x ** (2 * m) * np.power(one_minus_x2, 0.5 * ell) / (2 * m + ell)


# ── Quadrature grids ──────────────────────────────────────────────────────
@lru_cache(maxsize=32)
def _real_grid(ell: int, density: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nodes x = cos θ on (−1, 1), 1 − x² = sin²θ, and weights for ∫ w(x) h(x) dx.

    In θ the weight w(cos θ) sin θ = c^{½} sin^{ℓ−1} θ is smooth, and so is
    the whole skew-product integrand, so Gauss–Legendre in θ converges
    exponentially.
    """
    rule = gauss_legendre(density, 0.0, math.pi)
    theta = rule.nodes
    sin_t = np.sin(theta)
    weights = rule.weights * math.sqrt(_real_axis_constant(ell)) * sin_t ** (ell - 1)
    return np.cos(theta), sin_t ** 2, weights


@lru_cache(maxsize=32)
def _complex_grid(ell: int, density: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for ∫∫ h(z) w²(z) dx dy over the quarter disk
    {|z| ≤ 1, Re z ≥ 0, Im z ≥ 0}.

    Polar coordinates about z = 1: z = 1 + r e^{iψ}. For ψ ∈ [π/2, 3π/4] the
    unit circle bounds r ≤ −2 cos ψ; for ψ ∈ [3π/4, π] the imaginary axis
    bounds r ≤ −1/cos ψ. The Jacobian r cancels the |1 − z²|^{−1}
    singularity of the ℓ = 1 weight.
    """
    nodes, weights = [], []
    for lo, hi, radius in (
        (0.5 * math.pi, 0.75 * math.pi, lambda c: -2.0 * c),
        (0.75 * math.pi, math.pi, lambda c: -1.0 / c),
    ):
        psi_rule = gauss_legendre(density, lo, hi)
        unit_r = gauss_legendre(density, 0.0, 1.0)
        psi = psi_rule.nodes[:, None]
        cos_p = np.cos(psi)
        R = radius(cos_p)
        r = R * unit_r.nodes[None, :]
        e = np.exp(1j * psi)
        z = 1.0 + r * e
        one_minus_abs2 = -r * (2.0 * cos_p + r)
        abs_one_minus_z2 = r * np.abs(2.0 + r * e)
        w2 = _weight_sq_parts(ell, one_minus_abs2, abs_one_minus_z2)
        jac = psi_rule.weights[:, None] * (R * unit_r.weights[None, :]) * r
        nodes.append(z.ravel())
        weights.append((w2 * jac).ravel())
    z_all = np.concatenate(nodes)
    w_all = np.concatenate(weights)
    z_all.flags.writeable = False
    w_all.flags.writeable = False
    return z_all, w_all


def _real_part(i: int, j: int, ell: int, density: int) -> float:
    x, one_minus_x2, w = _real_grid(ell, density)
    integrand = (
        pi_eval(i, ell, x) * eps_transform(j, ell, x, one_minus_x2)
        - pi_eval(j, ell, x) * eps_transform(i, ell, x, one_minus_x2)
    )
    return float(np.dot(w, integrand))


def _complex_part(i: int, j: int, ell: int, density: int) -> float:
    z_right, w = _complex_grid(ell, density)
    total = 0.0
    # right quarter plus its mirror image −conj(z) (same weight)
    for z in (z_right, -np.conj(z_right)):
        total += float(np.dot(w, np.imag(pi_eval(i, ell, z) * np.conj(pi_eval(j, ell, z)))))
    # −2 ∫∫ Im(f ḡ) w² sgn(Im z) over the disk is −4× the upper half-disk integral
    return -4.0 * total


def skew_product_quadrature(i: int, j: int, ell: int,
                            rule_density: int = DEFAULT_RULE_DENSITY) -> Tuple[float, float]:
    """
    (real_part, complex_part) of (π_i, π_j) by quadrature.

    Each part is recomputed on a grid of half the density; a difference above
    RICHARDSON_TOLERANCE raises AccuracyBudget.
    """
    if i < 0 or j < 0 or i + j > QUADRATURE_MAX_DEGREE:
        raise DomainError(f"skew_product_quadrature needs 0 <= i, j and i+j <= {QUADRATURE_MAX_DEGREE}, got ({i}, {j})")
    if not 1 <= ell <= QUADRATURE_MAX_ELL:
        raise DomainError(f"skew_product_quadrature needs 1 <= ell <= {QUADRATURE_MAX_ELL}, got {ell}")
    if rule_density < 8:
        raise DomainError(f"rule_density must be >= 8, got {rule_density}")

    half = rule_density // 2
    real_part = _real_part(i, j, ell, rule_density)
    complex_part = _complex_part(i, j, ell, rule_density)
    real_err = abs(real_part - _real_part(i, j, ell, half))
    complex_err = abs(complex_part - _complex_part(i, j, ell, half))
    logger.debug(f"skew product ({i},{j}) ell={ell}: real err {real_err:.2e}, complex err {complex_err:.2e}")
    if max(real_err, complex_err) > RICHARDSON_TOLERANCE:
        raise AccuracyBudget(
            f"skew product ({i},{j}) at ell={ell}, density {rule_density}: "
            f"Richardson estimate {max(real_err, complex_err):.2e} exceeds {RICHARDSON_TOLERANCE:.0e}"
        )
    return real_part, complex_part


# ── Matrices and the Pfaffian ratio ───────────────────────────────────────
def skew_matrix(params: EnsembleParams, part: Part = "full",
                rule_density: int = DEFAULT_RULE_DENSITY) -> SkewMatrix:
    """The 2n×2n matrix {(π_i, π_j)}; ``complex`` entries come from quadrature."""
    dim = 2 * params.n
    A = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            if part == "full":
                A[i, j] = skew_product_closed(i, j, params.ell)
            elif part == "real":
                A[i, j] = skew_product_real_closed(i, j, params.ell)
            else:
                A[i, j] = skew_product_quadrature(i, j, params.ell, rule_density)[1]
    return SkewMatrix.from_dense(A)


def pfaffian_ratio_p(params: EnsembleParams, rule_density: int = DEFAULT_RULE_DENSITY) -> float:
    """Pf{(π_i, π_j)_ℂ} / Pf{(π_i, π_j)}, an independent route to P(no real eigenvalue)."""
    numerator = skew_matrix(params, "complex", rule_density)
    denominator = skew_matrix(params, "full")
    pf_complex = checkerboard_pfaffian(numerator, atol=CHECKERBOARD_TOLERANCE)
    pf_full = pfaffian(denominator)
    logger.info(f"Pfaffian ratio n={params.n} ell={params.ell}: {pf_complex:.12g} / {pf_full:.12g}")
    return pf_complex / pf_full
