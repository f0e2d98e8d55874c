# accountant/mc.py
"""Monte Carlo oracle for the shuffled pair.

Samples come from the reduced form (C, A, Delta) rather than from n local
randomizers. Every run is split into a fixed number of child streams of its
seed, so estimates are reproducible bit for bit whatever the worker count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special, stats

from .conf import setting
from .dist import multinomial_moments, multinomial_probabilities, split_streams
from .domain import McEstimate, ShuffleParams
from .exceptions import DomainError, require
from .pairdist import SIDES, build_pair, log_mixture_ratio

logger = logging.getLogger(__name__)


# =======================
# Sampling
# =======================
def sample_pairs(params: ShuffleParams, side: str, size: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """size draws of (a, b): (A + Delta, C - A + 1 - Delta) under P, (A + 1 - Delta, C - A + Delta) under Q"""
    require(side in SIDES, f"side must be one of {SIDES}, got {side!r}")
    require(int(size) == size and size >= 0, f"size must be a nonnegative integer, got {size}")
    c = rng.binomial(params.n - 1, params.p, size=int(size))
    a = rng.binomial(c, 0.5)
    delta = (rng.random(int(size)) < params.q).astype(np.int64)
    if side == 'P':
        return a + delta, c - a + 1 - delta
    return a + 1 - delta, c - a + delta


def sample_pair(params: ShuffleParams, side: str, rng: np.random.Generator) -> Tuple[int, int]:
    a, b = sample_pairs(params, side, 1, rng)
    return int(a[0]), int(b[0])


def _chunk_sizes(samples: int, chunks: int) -> List[int]:
    base, extra = divmod(samples, chunks)
    return [base + (1 if i < extra else 0) for i in range(chunks)]


def _parallel_samples(params: ShuffleParams, side: str, samples: int,
                      streams: Sequence[np.random.Generator]) -> Tuple[np.ndarray, np.ndarray]:
    sizes = _chunk_sizes(samples, len(streams))
    with ThreadPoolExecutor(max_workers=min(setting('WORKERS'), len(streams))) as pool:
        parts = list(pool.map(lambda job: sample_pairs(params, side, job[0], job[1]), zip(sizes, streams)))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


# =======================
# Type-II error at a fixed type-I error
# =======================
def _reduced_log_ratio(a: np.ndarray, b: np.ndarray, epsilon0: float) -> np.ndarray:
    """Analytic ln Q/P on gcd-reduced pairs, so equal ratios compare equal bit for bit"""
    g = np.gcd(a, b)
    g = np.where(g == 0, 1, g)
    return log_mixture_ratio(a // g, b // g, epsilon0)


class _ThresholdTest:
    """Randomized Neyman-Pearson test of P against Q calibrated on the exact P"""

    def __init__(self, params: ShuffleParams, tail_tol: Optional[float] = None):
        P, _ = build_pair(params, tail_tol)
        self.epsilon0 = params.epsilon0
        ratios = _reduced_log_ratio(P.a, P.b, params.epsilon0)
        values, inverse = np.unique(ratios, return_inverse=True)
        masses = np.bincount(inverse, weights=np.exp(P.log_p), minlength=values.size)
        # descending in ratio: reject the highest Q/P first
        self.values = values[::-1]
        self.masses = masses[::-1] / masses.sum()
        self.cumulative = np.cumsum(self.masses)

    def calibrate(self, alpha: float) -> Tuple[float, float]:
        """(threshold, gamma): reject above threshold, with probability gamma at it"""
        k = int(np.searchsorted(self.cumulative, alpha, side='left'))
        k = min(k, self.values.size - 1)
        above = self.cumulative[k - 1] if k > 0 else 0.0
        gamma = (alpha - above) / self.masses[k] if self.masses[k] > 0 else 0.0
        return float(self.values[k]), float(min(max(gamma, 0.0), 1.0))

    def accept_probability(self, alpha: float, ratios: np.ndarray) -> np.ndarray:
        outside = int(np.count_nonzero(~np.isin(ratios, self.values)))
        if outside:
            logger.debug(f"{outside} of {ratios.size} samples fall outside the truncated support "
                         f"(eps0={self.epsilon0})")
        threshold, gamma = self.calibrate(alpha)
        return np.where(ratios > threshold, 0.0, np.where(ratios == threshold, 1.0 - gamma, 1.0))


def _beta_estimate(test: _ThresholdTest, alpha: float, ratios: np.ndarray, seed: int) -> McEstimate:
    accept = test.accept_probability(alpha, ratios)
    stderr = float(accept.std(ddof=1) / math.sqrt(accept.size)) if accept.size > 1 else 0.0
    return McEstimate(value=float(accept.mean()), stderr=stderr, samples=int(accept.size), seed=seed)


def _q_ratios(params: ShuffleParams, samples: int, seed: int) -> np.ndarray:
    streams = split_streams(seed, setting('MC_CHUNKS'))
    a, b = _parallel_samples(params, 'Q', samples, streams)
    return _reduced_log_ratio(a, b, params.epsilon0)


def _check_beta_args(alpha: float, samples: int) -> None:
    require(0.0 < alpha < 1.0, f"alpha must lie strictly inside (0, 1), got {alpha}")
    minimum = setting('BETA_MIN_SAMPLES')
    require(int(samples) == samples and samples >= minimum,
            f"at least {minimum} samples are needed, got {samples}", code='insufficient_samples')


def estimate_beta_at_alpha(params: ShuffleParams, alpha: float, samples: int, seed: int,
                           tail_tol: Optional[float] = None) -> McEstimate:
    """Type-II error of the exact-ratio test at type-I error alpha, estimated on Q samples"""
    _check_beta_args(alpha, samples)
    test = _ThresholdTest(params, tail_tol)
    return _beta_estimate(test, alpha, _q_ratios(params, int(samples), seed), seed)


def estimate_curve(params: ShuffleParams, alphas: Iterable[float], samples: int, seed: int,
                   tail_tol: Optional[float] = None) -> List[Tuple[float, McEstimate]]:
    """Empirical curve points sharing one set of Q samples"""
    alphas = [float(alpha) for alpha in alphas]
    require(len(alphas) > 0, "at least one alpha is needed")
    for alpha in alphas:
        _check_beta_args(alpha, samples)
    test = _ThresholdTest(params, tail_tol)
    ratios = _q_ratios(params, int(samples), seed)
    return [(alpha, _beta_estimate(test, alpha, ratios, seed)) for alpha in alphas]


# =======================
# Plug-in Renyi divergence
# =======================
def _plugin_value(counts_p: np.ndarray, counts_q: np.ndarray, lam: float) -> float:
    common = (counts_p > 0) & (counts_q > 0)
    log_p = np.log(counts_p[common] / counts_p.sum())
    log_q = np.log(counts_q[common] / counts_q.sum())
    return float(special.logsumexp(lam * log_p + (1.0 - lam) * log_q) / (lam - 1.0))


def estimate_renyi_plugin(params: ShuffleParams, lam: float, samples: int, seed: int) -> McEstimate:
    """Plug-in D^lam(P || Q) from empirical PMFs on the support seen on both sides"""
    require(math.isfinite(lam) and lam > 1, f"Renyi order must be > 1, got {lam}")
    max_n = setting('PLUGIN_MAX_N')
    require(params.n <= max_n, f"plug-in estimates are only reliable for n <= {max_n}, got {params.n}")
    minimum = setting('PLUGIN_MIN_SAMPLES')
    require(int(samples) == samples and samples >= minimum,
            f"at least {minimum} samples are needed, got {samples}", code='insufficient_samples')
    samples = int(samples)
    chunks = setting('MC_CHUNKS')
    streams = split_streams(seed, 2 * chunks + 1)
    width = params.n + 2
    counts = {}
    for side, side_streams in (('P', streams[:chunks]), ('Q', streams[chunks:2 * chunks])):
        a, b = _parallel_samples(params, side, samples, side_streams)
        counts[side] = np.bincount(a * width + b, minlength=width * width).astype(float)

    value = _plugin_value(counts['P'], counts['Q'], lam)
    boot_rng = streams[-1]
    resamples = setting('BOOTSTRAP_RESAMPLES')
    freq_p = counts['P'] / samples
    freq_q = counts['Q'] / samples
    boot = np.empty(resamples)
    for r in range(resamples):
        boot[r] = _plugin_value(
            boot_rng.multinomial(samples, freq_p).astype(float),
            boot_rng.multinomial(samples, freq_q).astype(float),
            lam,
        )
    return McEstimate(value=value, stderr=float(boot.std(ddof=1)), samples=samples, seed=seed)


# =======================
# Normal approximation of the counts
# =======================
def _clt_row(params: ShuffleParams, samples: int, rng: np.random.Generator) -> Dict[str, float]:
    moments = multinomial_moments(params)
    sigma = moments.covariance[:2, :2]
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as e:
        raise DomainError(f"count covariance is singular at eps0={params.epsilon0}: {e}", code='singular')
    counts = rng.multinomial(params.n - 1, multinomial_probabilities(params), size=samples)
    centered = counts[:, :2] - moments.mean[:2]
    z = np.linalg.solve(chol, centered.T).T
    mean_dev = float(np.max(np.abs(z.mean(axis=0))))
    cov_dev = float(np.max(np.abs(np.cov(z, rowvar=False) - np.eye(2))))
    # difference of the two counts, standardized, against N(0, 1)
    spread = (counts[:, 1] - counts[:, 0]) / math.sqrt((params.n - 1) * params.p)
    ks = float(stats.kstest(spread, 'norm').statistic)
    return {
        'n': params.n,
        'mean_deviation': mean_dev,
        'covariance_deviation': cov_dev,
        'max_deviation': max(mean_dev, cov_dev),
        'ks_distance': ks,
    }


def clt_diagnostic(params: ShuffleParams, samples: int, seed: int,
                   ns: Optional[Iterable[int]] = None) -> dict:
    """Standardized moment deviations and a KS distance of the counts, per n.

    A trend report only: nothing here decides whether the normal
    approximation is good enough.
    """
    minimum = setting('PLUGIN_MIN_SAMPLES')
    require(int(samples) == samples and samples >= minimum,
            f"at least {minimum} samples are needed, got {samples}", code='insufficient_samples')
    ns = [params.n] if ns is None else [int(n) for n in ns]
    require(len(ns) > 0 and all(n >= 2 for n in ns), f"every n must be >= 2, got {ns}")
    streams = split_streams(seed, len(ns))
    rows = [
        _clt_row(ShuffleParams(params.epsilon0, n), int(samples), rng)
        for n, rng in zip(ns, streams)
    ]
    return {'epsilon0': params.epsilon0, 'samples': int(samples), 'seed': seed, 'rows': rows}
