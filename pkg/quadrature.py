"""
Quadrature rules shared by the numerical modules.

A ``QuadratureRule`` is a frozen set of nodes and weights for a finite
interval or a half-line. Builders:

    gauss_legendre(n, a, b)      polynomial-exact rule on [a, b]
    tanh_sinh(a, b, h)           double-exponential rule on [a, b]; endpoint
                                 singularities (log, algebraic) are harmless
    exp_sinh(a, h, x_max)        double-exponential rule on [a, ∞)
"""
import math
from functools import lru_cache
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.special import expit

from errors import DomainError

Domain = Literal["interval", "semi_infinite"]


class QuadratureRule(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nodes: np.ndarray
    weights: np.ndarray
    domain: Domain
    a: float
    b: float = math.inf

    @model_validator(mode="after")
    def _positive_weights(self) -> "QuadratureRule":
        if self.nodes.shape != self.weights.shape:
            raise ValueError("QuadratureRule nodes and weights differ in shape")
        if np.any(self.weights <= 0):
            raise ValueError("QuadratureRule weights must be positive")
        return self

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Σ w_i f(x_i); ``f`` is called once on the whole node array."""
        return float(np.dot(self.weights, f(self.nodes)))


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    if n < 1:
        raise DomainError(f"gauss_legendre needs at least one node, got {n}")
    if not b > a:
        raise DomainError(f"gauss_legendre needs a < b, got [{a}, {b}]")
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=a + half * (x + 1.0), weights=half * w, domain="interval", a=a, b=b)


def composite_gauss_legendre(a: float, b: float, panels: int, order: int = 16) -> QuadratureRule:
    """Gauss–Legendre of the given order on each of ``panels`` equal subintervals."""
    if panels < 1:
        raise DomainError(f"composite_gauss_legendre needs at least one panel, got {panels}")
    edges = np.linspace(a, b, panels + 1)
    x, w = _leggauss(order)
    half = 0.5 * np.diff(edges)[:, None]
    nodes = edges[:-1, None] + half * (x[None, :] + 1.0)
    return QuadratureRule(nodes=nodes.ravel(), weights=(half * w[None, :]).ravel(), domain="interval", a=a, b=b)


def tanh_sinh(a: float, b: float, h: float = 1.0 / 32, t_max: float = 3.5) -> QuadratureRule:
    """
    Tanh-sinh rule on [a, b].

    Nodes are a + (b−a)·expit(π sinh t), which keeps the distance to ``a``
    accurate down to subnormal scale; nodes that round onto an endpoint are
    dropped.
    """
    if not b > a:
        raise DomainError(f"tanh_sinh needs a < b, got [{a}, {b}]")
    t = np.arange(-t_max, t_max + 0.5 * h, h)
    u = math.pi * np.sinh(t)
    s = expit(u)
    x = a + (b - a) * s
    w = (b - a) * h * math.pi * np.cosh(t) * s * expit(-u)
    keep = (x > a) & (x < b) & (w > 0)
    return QuadratureRule(nodes=x[keep], weights=w[keep], domain="interval", a=a, b=b)


def exp_sinh(a: float, h: float = 1.0 / 32, t_min: float = -4.0, t_max: float = 3.5,
             x_max: Optional[float] = None) -> QuadratureRule:
    """
    Exp-sinh rule on [a, ∞): x = a + exp((π/2) sinh t).

    ``x_max`` drops the far nodes, for integrands known to be negligible there.
    """
    t = np.arange(t_min, t_max + 0.5 * h, h)
    u = 0.5 * math.pi * np.sinh(t)
    offset = np.exp(u)
    x = a + offset
    w = h * 0.5 * math.pi * np.cosh(t) * offset
    keep = (w > 0) & (x > a)
    if x_max is not None:
        keep &= x <= x_max
    return QuadratureRule(nodes=x[keep], weights=w[keep], domain="semi_infinite", a=a)


def integrate_with_error(f: Callable[[np.ndarray], np.ndarray], build: Callable[[float], QuadratureRule],
                         h: float = 1.0 / 32):
    """Integrate with step h and 2h; return (value, |difference|)."""
    fine = build(h).integrate(f)
    coarse = build(2.0 * h).integrate(f)
    return fine, abs(fine - coarse)
