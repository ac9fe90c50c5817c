"""
Monte Carlo ground truth: Haar sampling, real-eigenvalue counts of
truncations, Kac polynomials and the sech^ℓ random walk.
"""
import logging
import math
import os
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest
from pydantic import ValidationError

from asym import theta, theta_ell
from cli import fit_slope
from ensemble import expected_real_count, make_params, p_no_real, real_count_distribution
from errors import BandwidthTooSmall, DomainError
from mc import (
    MCEstimate,
    RngStream,
    WalkConfig,
    estimate_distribution,
    estimate_expected_real_count,
    estimate_kac_mean_roots,
    estimate_kac_persistence,
    estimate_p_no_real,
    haar_orthogonal,
    haar_orthogonal_batch,
    make_stream,
    kac_real_root_counts,
    kac_real_roots,
    sample_real_count,
    sample_real_counts,
    sample_walk_steps,
    step_density,
    truncation_batch,
    walk_theta,
    wilson_estimate,
)
from quadrature import composite_gauss_legendre


def _covers(estimate: MCEstimate, exact: float, sigmas: float = 4.0) -> bool:
    return abs(estimate.mean - exact) <= sigmas * estimate.stderr


# ── Streams ───────────────────────────────────────────────────────────────
def test_rng_stream_is_reproducible():
    a = RngStream(seed=42, stream_index=3).generator().standard_normal(5)
    b = RngStream(seed=42, stream_index=3).generator().standard_normal(5)
    c = RngStream(seed=42, stream_index=4).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_rng_stream_rejects_negative_seed():
    with pytest.raises(ValidationError):
        RngStream(seed=-1)
    with pytest.raises(DomainError):
        make_stream(2 ** 64)
    with pytest.raises(DomainError):
        estimate_p_no_real(make_params(1, 1), 1000, seed=-1, workers=1)


def test_wilson_estimate():
    est = wilson_estimate(25, 100, seed=1)
    assert est.mean == 0.25
    assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100), rel=0.05)
    assert wilson_estimate(0, 1000, seed=1).stderr > 0


# ── Haar sampler ──────────────────────────────────────────────────────────
def test_haar_matrix_is_orthogonal():
    for dim in (1, 2, 5, 13):
        O = haar_orthogonal(dim, RngStream(seed=dim))
        assert np.abs(O.T @ O - np.eye(dim)).max() < 1e-12


def test_haar_moments():
    dim, draws = 6, 100_000
    O = haar_orthogonal_batch(draws, dim, RngStream(seed=2024).generator())
    assert np.abs(np.einsum("bij,bik->bjk", O, O) - np.eye(dim)).max() < 1e-12
    o11 = O[:, 0, 0] ** 2
    assert abs(o11.mean() - 1 / dim) <= 4 * o11.std() / math.sqrt(draws)
    tr2 = np.trace(O, axis1=1, axis2=2) ** 2
    assert abs(tr2.mean() - 1.0) <= 4 * tr2.std() / math.sqrt(draws)


def test_truncation_eigenvalues_stay_in_disk():
    params = make_params(3, 1)
    M = truncation_batch(params, 500, RngStream(seed=8).generator())
    assert M.shape == (500, 6, 6)
    assert np.abs(np.linalg.eigvals(M)).max() <= 1 + 1e-10


def test_real_counts_are_even_and_bounded():
    params = make_params(3, 2)
    counts = sample_real_counts(params, 2000, RngStream(seed=5))
    assert counts.shape == (2000,)
    assert np.all(counts % 2 == 0)
    assert counts.min() >= 0 and counts.max() <= 6
    single = sample_real_count(params, RngStream(seed=6))
    assert single % 2 == 0 and 0 <= single <= 6


# ── Truncation estimators ─────────────────────────────────────────────────
def test_persistence_estimate_smallest_case():
    params = make_params(1, 1)
    est = estimate_p_no_real(params, 20_000, seed=3, workers=1)
    assert est.samples == 20_000 and est.seed == 3
    assert _covers(est, p_no_real(params))


def test_estimate_independent_of_worker_count():
    params = make_params(2, 1)
    serial = estimate_p_no_real(params, 4000, seed=11, workers=1)
    pooled = estimate_p_no_real(params, 4000, seed=11, workers=2)
    assert serial == pooled


def test_estimate_requires_enough_samples():
    with pytest.raises(DomainError):
        estimate_p_no_real(make_params(1, 1), 10, seed=0)


def test_distribution_estimate_covers_exact():
    params = make_params(2, 2)
    estimates = estimate_distribution(params, 40_000, seed=9, workers=1)
    exact = real_count_distribution(params).probs
    assert math.fsum(e.mean for e in estimates) == pytest.approx(1.0, abs=1e-12)
    for est, p in zip(estimates, exact):
        assert _covers(est, p)


def test_expected_real_count_estimate():
    params = make_params(3, 1)
    est = estimate_expected_real_count(params, 40_000, seed=4, workers=1)
    assert _covers(est, expected_real_count(params))


@pytest.mark.slow
@pytest.mark.parametrize("n,ell", [(1, 1), (2, 1), (3, 1), (1, 2), (2, 2)])
def test_persistence_estimate_matches_determinant(n, ell):
    params = make_params(n, ell)
    est = estimate_p_no_real(params, 100_000, seed=n * 10 + ell)
    assert _covers(est, p_no_real(params))


# ── Kac polynomials ───────────────────────────────────────────────────────
def test_linear_kac_polynomial_has_one_root():
    assert kac_real_roots(1, RngStream(seed=1)) == 1
    assert np.all(kac_real_root_counts(1, 100, RngStream(seed=2)) == 1)


def test_kac_root_count_parity():
    for N in (3, 4, 7):
        counts = kac_real_root_counts(N, 500, RngStream(seed=N))
        assert np.all(counts % 2 == N % 2)
        assert counts.max() <= N


def test_kac_quadratic_persistence():
    est = estimate_kac_persistence(2, 40_000, seed=21, workers=1)
    a = np.random.default_rng(12345).standard_normal((1_000_000, 3))
    brute = float(np.mean(a[:, 1] ** 2 < 4 * a[:, 0] * a[:, 2]))
    brute_se = math.sqrt(brute * (1 - brute) / len(a))
    assert abs(est.mean - brute) <= 4 * math.hypot(est.stderr, brute_se)


def test_kac_persistence_arguments():
    with pytest.raises(DomainError):
        estimate_kac_persistence(3, 10_000, seed=0)
    with pytest.raises(DomainError):
        estimate_kac_persistence(4, 100, seed=0)


@pytest.mark.slow
def test_kac_mean_roots_grow_logarithmically():
    points = []
    for N in (50, 200, 800):
        est = estimate_kac_mean_roots(N, 400, seed=N)
        points.append((math.log(N), est.mean))
    slope, _, _ = fit_slope(points)
    assert slope == pytest.approx(2 / math.pi, abs=0.15)


@pytest.mark.slow
def test_kac_persistence_decay():
    points = []
    for N in (16, 32, 64, 128, 256):
        est = estimate_kac_persistence(N, 100_000, seed=N)
        points.append((math.log(N), math.log(est.mean)))
    slope, _, _ = fit_slope(points)
    assert slope == pytest.approx(-0.75, abs=0.2)


# ── sech^ℓ walk ───────────────────────────────────────────────────────────
@pytest.mark.parametrize("ell", [1, 2, 3])
def test_step_density_is_normalized(ell):
    rule = composite_gauss_legendre(-80.0, 80.0, panels=160)
    assert rule.integrate(lambda x: step_density(ell, x)) == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("ell", [1, 2, 4])
def test_walk_steps_variance(ell):
    draws = 200_000
    x = sample_walk_steps(ell, draws, RngStream(seed=ell))
    rule = composite_gauss_legendre(-120.0, 120.0, panels=240)
    variance = rule.integrate(lambda t: t * t * step_density(ell, t))
    if ell == 1:
        assert variance == pytest.approx(math.pi ** 2, rel=1e-8)
    sq = x * x
    assert abs(sq.mean() - variance) <= 4 * sq.std() / math.sqrt(draws)
    assert abs(x.mean()) <= 4 * x.std() / math.sqrt(draws)


def test_walk_config_validation():
    with pytest.raises(ValidationError):
        WalkConfig(ell=1, samples=100, bandwidth=0.05)
    with pytest.raises(ValidationError):
        WalkConfig(ell=1, samples=10_000, bandwidth=0.0)


def test_walk_bandwidth_too_small():
    config = WalkConfig(ell=1, samples=10_000, bandwidth=1e-4, max_steps=50)
    with pytest.raises(BandwidthTooSmall):
        walk_theta(config, seed=1, workers=1)


def test_walk_theta_averages_over_finished_walks(caplog):
    # one step: only walks whose first step is negative finish
    config = WalkConfig(ell=1, samples=20_000, bandwidth=0.2, max_steps=1)
    with caplog.at_level(logging.INFO, logger="orthopersist.mc"):
        est = walk_theta(config, seed=3, workers=1)
    assert 9_000 < est.samples < 11_000
    assert "finished walks" in caplog.text


def test_walk_theta_rough():
    est = walk_theta(WalkConfig(ell=1, samples=100_000, bandwidth=0.1), seed=5, workers=1)
    assert est.mean == pytest.approx(0.1875, abs=0.03)


@pytest.mark.slow
def test_walk_theta_rank_one():
    est = walk_theta(WalkConfig(ell=1, samples=1_000_000, bandwidth=0.05), seed=7)
    assert est.mean == pytest.approx(theta().value, abs=0.02)


@pytest.mark.slow
def test_walk_theta_rank_two():
    est = walk_theta(WalkConfig(ell=2, samples=1_000_000, bandwidth=0.05), seed=8)
    assert est.mean == pytest.approx(theta_ell(2).value, abs=0.02)
