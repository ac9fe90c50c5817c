"""
Monte Carlo ground truth.

Haar orthogonal sampling, real eigenvalue counts of truncations, real roots of
Kac polynomials, and the sech^ℓ random walk whose overshoot density at the
origin estimates θ(ℓ).

Every estimator splits its samples over a fixed number of RNG streams, so the
result depends only on (seed, samples) and never on how many worker
processes ran the streams.
"""
import logging
import math
from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.special import betaln

from densela import real_eigen_count_batch, real_eigen_schur
from ensemble import EnsembleParams
from errors import BandwidthTooSmall, DegenerateLeadingCoefficient, DomainError, NoConvergence
from workers import map_streams

logger = logging.getLogger("orthopersist.mc")

N_STREAMS = 16
MIN_SAMPLES = 1_000
MIN_KAC_PERSISTENCE_SAMPLES = 10_000
MIN_WALK_SAMPLES = 10_000
KAC_MAX_DEGREE = 2000
WINDOW_MIN_COUNT = 100
BATCH_ENTRIES = 1 << 21


# ── Types ─────────────────────────────────────────────────────────────────
class RngStream(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2 ** 64)
    stream_index: int = Field(0, ge=0)

    def generator(self) -> np.random.Generator:
        """PCG64 seeded from (seed, stream_index); Gaussians use numpy's ziggurat."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))))


def make_stream(seed: int, stream_index: int = 0) -> RngStream:
    try:
        return RngStream(seed=seed, stream_index=stream_index)
    except ValidationError as e:
        raise DomainError(f"invalid RNG stream (seed={seed}, index={stream_index})") from e


class MCEstimate(BaseModel):
    mean: float
    stderr: float
    samples: int
    seed: int


class WalkConfig(BaseModel):
    ell: int = Field(..., ge=1)
    samples: int = Field(..., ge=MIN_WALK_SAMPLES)
    bandwidth: float = Field(..., gt=0)
    max_steps: int = Field(10_000, ge=1)


RngLike = Union[RngStream, np.random.Generator]


def _gen(rng: RngLike) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def _stream_sizes(samples: int) -> List[int]:
    sizes = [samples // N_STREAMS] * N_STREAMS
    for i in range(samples % N_STREAMS):
        sizes[i] += 1
    return sizes


def wilson_estimate(successes: int, samples: int, seed: int, z: float = 1.0) -> MCEstimate:
    """Proportion with the Wilson-interval half-width (at z = 1) as its error bar."""
    p = successes / samples
    denom = 1.0 + z * z / samples
    half = z / denom * math.sqrt(p * (1.0 - p) / samples + z * z / (4.0 * samples * samples))
    return MCEstimate(mean=p, stderr=half, samples=samples, seed=seed)


def mean_estimate(total: float, total_sq: float, samples: int, seed: int) -> MCEstimate:
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return MCEstimate(mean=mean, stderr=math.sqrt(var / samples), samples=samples, seed=seed)


# ── Haar orthogonal matrices ──────────────────────────────────────────────
def haar_orthogonal_batch(count: int, dim: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` Haar orthogonal matrices: QR of Gaussian matrices, columns signed by sgn(R_ii)."""
    G = gen.standard_normal((count, dim, dim))
    Q, R = np.linalg.qr(G)
    sign = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    sign[sign == 0] = 1.0
    return Q * sign[:, None, :]


def haar_orthogonal(dim: int, rng: RngLike) -> np.ndarray:
    if dim < 1:
        raise DomainError(f"haar_orthogonal requires dim >= 1, got {dim}")
    return haar_orthogonal_batch(1, dim, _gen(rng))[0]


# ── Truncations ───────────────────────────────────────────────────────────
def truncation_batch(params: EnsembleParams, count: int, gen: np.random.Generator) -> np.ndarray:
    """Top-left 2n×2n blocks of Haar matrices of size 2n+ℓ."""
    m = 2 * params.n
    return haar_orthogonal_batch(count, m + params.ell, gen)[:, :m, :m]


def sample_real_count(params: EnsembleParams, rng: RngLike) -> int:
    gen = _gen(rng)
    for attempt in range(2):
        M = truncation_batch(params, 1, gen)[0]
        try:
            return real_eigen_schur(M).real_count
        except NoConvergence:
            if attempt == 1:
                raise
            logger.warning(f"Schur iteration failed at n={params.n}, ell={params.ell}; resampling once")
    raise NoConvergence("unreachable")


def sample_real_counts(params: EnsembleParams, count: int, rng: RngLike) -> np.ndarray:
    gen = _gen(rng)
    dim = 2 * params.n + params.ell
    chunk = max(1, BATCH_ENTRIES // (dim * dim))
    out = []
    done = 0
    while done < count:
        size = min(chunk, count - done)
        out.append(real_eigen_count_batch(truncation_batch(params, size, gen)))
        done += size
    return np.concatenate(out) if out else np.zeros(0, dtype=int)


def _real_count_histogram(task: Tuple[int, int, int, int, int]) -> np.ndarray:
    seed, index, n, ell, count = task
    params = EnsembleParams(n=n, ell=ell)
    counts = sample_real_counts(params, count, make_stream(seed, index))
    return np.bincount(counts // 2, minlength=n + 1)


def _histogram(params: EnsembleParams, samples: int, seed: int, workers=None) -> np.ndarray:
    make_stream(seed)  # seed range check
    if samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    tasks = [(seed, i, params.n, params.ell, size) for i, size in enumerate(_stream_sizes(samples))]
    logger.info(f"Sampling {samples} truncations n={params.n} ell={params.ell} over {len(tasks)} streams")
    total = np.zeros(params.n + 1, dtype=np.int64)
    for hist in map_streams(_real_count_histogram, tasks, workers):
        total += hist
    return total


def estimate_p_no_real(params: EnsembleParams, samples: int, seed: int, workers=None) -> MCEstimate:
    hist = _histogram(params, samples, seed, workers)
    return wilson_estimate(int(hist[0]), samples, seed)


def estimate_distribution(params: EnsembleParams, samples: int, seed: int, workers=None) -> List[MCEstimate]:
    hist = _histogram(params, samples, seed, workers)
    return [wilson_estimate(int(c), samples, seed) for c in hist]


def estimate_expected_real_count(params: EnsembleParams, samples: int, seed: int, workers=None) -> MCEstimate:
    hist = _histogram(params, samples, seed, workers)
    values = 2.0 * np.arange(params.n + 1)
    return mean_estimate(float(hist @ values), float(hist @ values ** 2), samples, seed)


# ── Kac polynomials ───────────────────────────────────────────────────────
def _companion_batch(coeffs: np.ndarray) -> np.ndarray:
    """Companion matrices of the monic-normalized polynomials Σ a_k z^k, shape (B, N, N)."""
    B, N1 = coeffs.shape
    N = N1 - 1
    C = np.zeros((B, N, N))
    if N > 1:
        idx = np.arange(N - 1)
        C[:, idx + 1, idx] = 1.0
    C[:, :, -1] = -coeffs[:, :N] / coeffs[:, N:]
    return C


def kac_real_root_counts(N: int, count: int, rng: RngLike) -> np.ndarray:
    if not 1 <= N <= KAC_MAX_DEGREE:
        raise DomainError(f"Kac degree must be in [1, {KAC_MAX_DEGREE}], got {N}")
    gen = _gen(rng)
    chunk = max(1, BATCH_ENTRIES // (N * N))
    out = []
    done = 0
    while done < count:
        size = min(chunk, count - done)
        a = gen.standard_normal((size, N + 1))
        bad = np.abs(a[:, N]) < 1e-300
        if np.any(bad):
            a[bad, N] = gen.standard_normal(int(bad.sum()))
            if np.any(np.abs(a[:, N]) < 1e-300):
                raise DegenerateLeadingCoefficient(f"leading Kac coefficient vanished twice at degree {N}")
        # eigvals balances the companion matrix before the Schur iteration
        out.append(real_eigen_count_batch(_companion_batch(a)))
        done += size
    return np.concatenate(out)


def kac_real_roots(N: int, rng: RngLike) -> int:
    return int(kac_real_root_counts(N, 1, rng)[0])


def _kac_stream(task: Tuple[int, int, int, int]) -> Tuple[int, float, float]:
    seed, index, N, count = task
    roots = kac_real_root_counts(N, count, make_stream(seed, index)).astype(float)
    return int(np.count_nonzero(roots == 0)), float(roots.sum()), float((roots ** 2).sum())


def _kac_totals(N: int, samples: int, seed: int, workers=None) -> Tuple[int, float, float]:
    make_stream(seed)  # seed range check
    tasks = [(seed, i, N, size) for i, size in enumerate(_stream_sizes(samples))]
    logger.info(f"Sampling {samples} Kac polynomials of degree {N}")
    zeros, total, total_sq = 0, 0.0, 0.0
    for z, s, s2 in map_streams(_kac_stream, tasks, workers):
        zeros += z
        total += s
        total_sq += s2
    return zeros, total, total_sq


def estimate_kac_persistence(N: int, samples: int, seed: int, workers=None) -> MCEstimate:
    """Fraction of degree-N Kac polynomials without a real root."""
    if N % 2 == 1 or N < 2:
        raise DomainError(f"Kac persistence needs an even degree >= 2, got {N}")
    if samples < MIN_KAC_PERSISTENCE_SAMPLES:
        raise DomainError(f"need at least {MIN_KAC_PERSISTENCE_SAMPLES} samples, got {samples}")
    zeros, _, _ = _kac_totals(N, samples, seed, workers)
    return wilson_estimate(zeros, samples, seed)


def estimate_kac_mean_roots(N: int, samples: int, seed: int, workers=None) -> MCEstimate:
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples}")
    _, total, total_sq = _kac_totals(N, samples, seed, workers)
    return mean_estimate(total, total_sq, samples, seed)


# ── sech^ℓ random walk ────────────────────────────────────────────────────
def step_density(ell: int, x):
    """ρ_ℓ(x) = sech^ℓ(x/2) / (2 B(ℓ/2, ½))."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-0.5 * np.abs(x))
    sech = 2.0 * e / (1.0 + e * e)
    return sech ** ell / (2.0 * math.exp(float(betaln(0.5 * ell, 0.5))))


def sample_walk_steps(ell: int, count: int, rng: RngLike) -> np.ndarray:
    """
    I.i.d. steps with density ρ_ℓ.

    ℓ = 1 inverts the CDF (2/π) arctan(e^{x/2}); larger ℓ accepts ℓ = 1 draws
    with probability sech^{ℓ−1}(x/2).
    """
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell}")
    gen = _gen(rng)

    def cauchy_like(size: int) -> np.ndarray:
        u = gen.random(size)
        u = np.where(u == 0.0, 0.5, u)
        return 2.0 * np.log(np.tan(0.5 * math.pi * u))

    if ell == 1:
        return cauchy_like(count)
    out = np.empty(count)
    filled = 0
    # acceptance rate B(ℓ/2, ½)/π
    rate = math.exp(float(betaln(0.5 * ell, 0.5))) / math.pi
    while filled < count:
        need = count - filled
        x = cauchy_like(int(need / rate * 1.1) + 16)
        e = np.exp(-0.5 * np.abs(x))
        accept = gen.random(len(x)) < (2.0 * e / (1.0 + e * e)) ** (ell - 1)
        take = x[accept][:need]
        out[filled:filled + len(take)] = take
        filled += len(take)
    return out


def walk_overshoots(ell: int, count: int, max_steps: int, rng: RngLike) -> np.ndarray:
    """
    |S_τ| for τ = first n ≥ 1 with S_n < 0, S_0 = 0; NaN where τ > max_steps.
    """
    gen = _gen(rng)
    position = np.zeros(count)
    active = np.arange(count)
    overshoot = np.full(count, np.nan)
    for _ in range(max_steps):
        if active.size == 0:
            break
        position[active] += sample_walk_steps(ell, active.size, gen)
        crossed = position[active] < 0
        overshoot[active[crossed]] = -position[active[crossed]]
        active = active[~crossed]
    return overshoot


def _walk_stream(task: Tuple[int, int, int, int, int, float]) -> Tuple[int, int, float, float, int]:
    seed, index, ell, count, max_steps, bandwidth = task
    y = walk_overshoots(ell, count, max_steps, make_stream(seed, index))
    finished = y[~np.isnan(y)]
    u = finished / bandwidth
    # Epanechnikov kernel reflected at 0: θ contribution K(y/h)/h per walk
    z = np.where(u < 1.0, 0.75 * (1.0 - u * u), 0.0) / bandwidth
    return len(finished), count - len(finished), float(z.sum()), float((z * z).sum()), int(np.count_nonzero(u < 1.0))


def walk_theta(config: WalkConfig, seed: int, workers=None) -> MCEstimate:
    """
    θ(ℓ) = ½ f(0), f the density of the descending overshoot |S_τ| at 0,
    estimated by a boundary-reflected kernel of the configured bandwidth.

    Walks still positive after ``max_steps`` are censored: they are dropped and
    the mean runs over finished walks only, so the overshoots of very long
    excursions are missing from the estimate. At the default 10⁴ steps about
    0.5% of ℓ = 1 walks are censored.
    """
    make_stream(seed)  # seed range check
    tasks = [
        (seed, i, config.ell, size, config.max_steps, config.bandwidth)
        for i, size in enumerate(_stream_sizes(config.samples))
    ]
    logger.info(f"Simulating {config.samples} sech^{config.ell} walks, bandwidth {config.bandwidth}")
    finished, unfinished, total, total_sq, window = 0, 0, 0.0, 0.0, 0
    for f, u, s, s2, w in map_streams(_walk_stream, tasks, workers):
        finished += f
        unfinished += u
        total += s
        total_sq += s2
        window += w
    if unfinished:
        logger.info(
            f"{unfinished} of {config.samples} walks still positive after {config.max_steps} steps; "
            f"averaging over the {finished} finished walks"
        )
    if window < WINDOW_MIN_COUNT:
        raise BandwidthTooSmall(
            f"only {window} overshoots fell within bandwidth {config.bandwidth}; need {WINDOW_MIN_COUNT}"
        )
    return mean_estimate(total, total_sq, finished, seed)
