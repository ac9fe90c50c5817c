"""
Special functions behind every formula in the package.

Log-Gamma, Beta and the incomplete Beta function come from ``scipy.special``;
this module adds the domain checks, the log-space bookkeeping (``LogValue``),
Barnes-G ratios as log-Gamma sums, ζ(3/2) and the orthogonal-group volume.
"""
import math
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import special

from errors import DomainError

ArrayLike = Union[float, np.ndarray]


# ── Log-signed values ─────────────────────────────────────────────────────
class LogValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    sign: Literal[-1, 0, 1]
    log_abs: float = -math.inf

    @classmethod
    def from_value(cls, x: float) -> "LogValue":
        if x == 0:
            return cls(sign=0)
        return cls(sign=1 if x > 0 else -1, log_abs=math.log(abs(x)))

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> "LogValue":
        return cls(sign=sign, log_abs=log_abs)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue(sign=0)
        return LogValue(sign=self.sign * other.sign, log_abs=self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise DomainError("division of a LogValue by zero")
        if self.sign == 0:
            return LogValue(sign=0)
        return LogValue(sign=self.sign * other.sign, log_abs=self.log_abs - other.log_abs)


def _positive(name: str, x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} requires positive finite arguments, got {x}")
    return arr


def _scalar_or_array(arr: np.ndarray) -> ArrayLike:
    return float(arr) if arr.ndim == 0 else arr


# ── Gamma / Beta ──────────────────────────────────────────────────────────
def log_gamma(x: ArrayLike) -> ArrayLike:
    """ln Γ(x) for x > 0."""
    arr = _positive("log_gamma", x)
    return _scalar_or_array(special.gammaln(arr))


def log_beta(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """ln B(a, b) for a, b > 0."""
    a_arr = _positive("log_beta", a)
    b_arr = _positive("log_beta", b)
    return _scalar_or_array(special.betaln(a_arr, b_arr))


def inc_beta(x: ArrayLike, a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Non-regularized incomplete Beta B(x; a, b) = ∫₀ˣ t^{a−1}(1−t)^{b−1} dt."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(x_arr)) or np.any(x_arr < 0) or np.any(x_arr > 1):
        raise DomainError(f"inc_beta requires 0 <= x <= 1, got {x}")
    a_arr = _positive("inc_beta", a)
    b_arr = _positive("inc_beta", b)
    # betainc is regularized; scale back by B(a, b)
    value = special.betainc(a_arr, b_arr, x_arr) * np.exp(special.betaln(a_arr, b_arr))
    return _scalar_or_array(value)


def log_gamma_sum(n: int, a: float) -> float:
    """Σ_{j=0}^{n−1} ln Γ(j+a), i.e. ln(G(n+a)/G(a)) for the Barnes G-function."""
    if n < 0:
        raise DomainError(f"log_gamma_sum requires n >= 0, got {n}")
    _positive("log_gamma_sum", a)
    if n == 0:
        return 0.0
    return math.fsum(special.gammaln(a + np.arange(n, dtype=float)))


def log_barnes_g_ratio(n: int, a: float) -> float:
    """ln(G(n+a)/G(a))."""
    return log_gamma_sum(n, a)


def riemann_zeta_3_2() -> float:
    """ζ(3/2) = 2.6123753486854883..."""
    return float(special.zeta(1.5, 1.0))


def log_volume_orthogonal(N: int) -> float:
    """ln v_N = Σ_{j=1}^{N} [(j/2) ln π − ln Γ(j/2)], the volume of O(N)."""
    if N < 1:
        raise DomainError(f"log_volume_orthogonal requires N >= 1, got {N}")
    j = np.arange(1, N + 1, dtype=float)
    return math.fsum(0.5 * j * math.log(math.pi) - special.gammaln(0.5 * j))
