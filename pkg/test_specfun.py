"""
Special functions: log-Gamma, Beta, incomplete Beta, Barnes-G sums, ζ(3/2)
and the orthogonal-group volume.
"""
import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from errors import DomainError
from specfun import (
    LogValue,
    inc_beta,
    log_barnes_g_ratio,
    log_beta,
    log_gamma,
    log_gamma_sum,
    log_volume_orthogonal,
    riemann_zeta_3_2,
)

positive = st.floats(min_value=1e-3, max_value=50.0, allow_nan=False)


def test_log_gamma_values():
    assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)
    assert log_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-14)


def test_log_gamma_array_input():
    values = log_gamma(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(values, [0.0, 0.0, math.log(2.0)], atol=1e-14)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_log_gamma_rejects_non_positive(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)


def test_log_beta_values():
    assert log_beta(0.5, 1.0) == pytest.approx(math.log(2.0), rel=1e-14)
    assert log_beta(0.5, 2.0) == pytest.approx(math.log(4.0 / 3.0), rel=1e-14)


@given(positive, positive)
def test_log_beta_symmetric(a, b):
    assert log_beta(a, b) == pytest.approx(log_beta(b, a), rel=1e-13, abs=1e-13)


def test_inc_beta_endpoints():
    assert inc_beta(1.0, 2.5, 0.5) == pytest.approx(math.exp(log_beta(2.5, 0.5)), rel=1e-13)
    assert inc_beta(0.0, 2.5, 0.5) == 0.0


def test_inc_beta_power_case():
    # ∫₀^{1/4} t^{-1/2} dt = 2·√(1/4)
    assert inc_beta(0.25, 0.5, 1.0) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("x", [-0.1, 1.1])
def test_inc_beta_rejects_x_outside_unit_interval(x):
    with pytest.raises(DomainError):
        inc_beta(x, 1.0, 1.0)


def test_log_gamma_sum_values():
    assert log_gamma_sum(0, 0.7) == 0.0
    assert log_gamma_sum(3, 1.0) == pytest.approx(math.log(2.0), rel=1e-14)
    assert log_gamma_sum(2, 0.5) == pytest.approx(math.log(math.pi / 2.0), rel=1e-14)


def test_barnes_g_ratio_matches_factorial_product():
    # G(n+1) = Π_{k<n} k!
    n = 7
    expected = sum(math.lgamma(k + 1) for k in range(n))
    assert log_barnes_g_ratio(n, 1.0) == pytest.approx(expected, rel=1e-14)


def test_log_gamma_sum_rejects_negative_count():
    with pytest.raises(DomainError):
        log_gamma_sum(-1, 1.0)


def test_zeta_three_halves():
    assert riemann_zeta_3_2() == pytest.approx(2.6123753486854883, rel=1e-14)


def test_log_volume_orthogonal():
    assert log_volume_orthogonal(1) == pytest.approx(0.0, abs=1e-15)
    assert log_volume_orthogonal(2) == pytest.approx(math.log(math.pi), rel=1e-14)
    assert log_volume_orthogonal(3) == pytest.approx(math.log(2.0 * math.pi ** 2), rel=1e-14)
    with pytest.raises(DomainError):
        log_volume_orthogonal(0)


def test_log_value_arithmetic():
    a = LogValue.from_value(-3.0)
    b = LogValue.from_value(0.5)
    assert (a * b).value() == pytest.approx(-1.5, rel=1e-15)
    assert (a / b).value() == pytest.approx(-6.0, rel=1e-15)
    assert (a * LogValue.from_value(0.0)).sign == 0
    assert LogValue.from_log(math.log(2.0)).value() == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        a / LogValue(sign=0)
    with pytest.raises(ValidationError):
        LogValue(sign=2)


def test_log_value_keeps_underflowing_magnitudes():
    tiny = LogValue.from_log(-2000.0) * LogValue.from_log(-2000.0)
    assert tiny.log_abs == -4000.0
    assert tiny.value() == 0.0


@given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=1.0, max_value=20.0),
       st.floats(min_value=1.0, max_value=20.0))
def test_inc_beta_reflection(x, a, b):
    total = inc_beta(x, a, b) + inc_beta(1.0 - x, b, a)
    assert total == pytest.approx(math.exp(log_beta(a, b)), rel=1e-9)


@given(st.floats(min_value=0.5, max_value=50.0))
def test_log_gamma_duplication(z):
    rhs = log_gamma(z) + log_gamma(z + 0.5) + (2 * z - 1) * math.log(2.0) - 0.5 * math.log(2 * math.pi)
    assert log_gamma(2 * z) == pytest.approx(rhs, rel=1e-13, abs=1e-12)


@given(st.integers(min_value=0, max_value=60), st.floats(min_value=0.1, max_value=20.0))
def test_log_gamma_sum_first_difference(n, a):
    step = log_gamma_sum(n + 1, a) - log_gamma_sum(n, a)
    assert step == pytest.approx(log_gamma(n + a), rel=1e-9, abs=1e-9)
