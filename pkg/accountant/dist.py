# accountant/dist.py
"""Numerically stable probability primitives used across the accountant.

Binomial masses are handled in natural-log space via log-gamma, the normal
CDF goes through the complementary error function, and every random draw
takes an explicit numpy Generator; nothing here touches a global RNG.
"""
import math
from typing import List, Union

import numpy as np
from scipy import special
from scipy.stats import binom

from .domain import BinomialSpec, MultinomialMoments, ShuffleParams
from .exceptions import DomainError, require

LN2 = math.log(2.0)


# =======================
# Binomial
# =======================
def log_binomial_coefficient(trials: Union[int, np.ndarray], k: Union[int, np.ndarray]) -> np.ndarray:
    """ln C(trials, k); symmetric in k <-> trials - k bit for bit"""
    trials = np.asarray(trials, dtype=float)
    k = np.asarray(k, dtype=float)
    return special.gammaln(trials + 1.0) - (special.gammaln(k + 1.0) + special.gammaln(trials - k + 1.0))


def log_binomial_pmf_array(k: np.ndarray, spec: BinomialSpec) -> np.ndarray:
    """Vectorised ln P(Bin(trials, p) = k); -inf outside the support"""
    k = np.asarray(k)
    inside = (k >= 0) & (k <= spec.trials)
    kk = np.where(inside, k, 0).astype(float)
    p = spec.success_prob
    with np.errstate(divide='ignore', invalid='ignore'):
        values = (log_binomial_coefficient(spec.trials, kk)
                  + special.xlogy(kk, p)
                  + special.xlog1py(spec.trials - kk, -p))
    return np.where(inside, values, -np.inf)


def log_binomial_pmf(k: int, spec: BinomialSpec) -> float:
    """Natural-log probability that Bin(trials, success_prob) equals k"""
    if int(k) != k or not 0 <= k <= spec.trials:
        raise DomainError(f"k={k} outside [0, {spec.trials}]")
    return float(log_binomial_pmf_array(np.array([int(k)]), spec)[0])


def log_half_binomial_pmf(c: int, ks: np.ndarray) -> np.ndarray:
    """ln P(Bin(c, 1/2) = k) for k in ks, exactly symmetric around c/2"""
    return log_binomial_coefficient(c, ks) - c * LN2


def log_cumulative(log_masses: np.ndarray) -> np.ndarray:
    """Running log-sum-exp; monotone by construction"""
    if log_masses.size == 0:
        return log_masses.copy()
    return np.logaddexp.accumulate(log_masses)


def log_binomial_cdf(k: Union[int, np.ndarray], trials: Union[int, np.ndarray], p: float) -> np.ndarray:
    """ln P(Bin(trials, p) <= k), vectorised; -inf for k < 0"""
    k = np.asarray(k)
    with np.errstate(divide='ignore'):
        return np.where(k < 0, -np.inf, binom.logcdf(k, trials, p))


def central_window(log_pmf: np.ndarray, tail_budget: float):
    """Smallest contiguous index window whose two excluded tails each carry at most tail_budget.

    Returns (lo, hi, log_excluded) where log_excluded is the exact natural log
    of the mass outside [lo, hi].
    """
    require(0.0 < tail_budget < 0.5, f"tail budget must lie in (0, 1/2), got {tail_budget}")
    log_budget = math.log(tail_budget)
    lower = log_cumulative(log_pmf)
    upper = log_cumulative(log_pmf[::-1])[::-1]
    lo = int(np.searchsorted(lower, log_budget, side='right'))
    hi = len(log_pmf) - 1 - int(np.searchsorted(upper[::-1], log_budget, side='right'))
    pieces = []
    if lo > 0:
        pieces.append(lower[lo - 1])
    if hi < len(log_pmf) - 1:
        pieces.append(upper[hi + 1])
    log_excluded = float(special.logsumexp(pieces)) if pieces else -np.inf
    return lo, hi, log_excluded


def symmetric_half_windows(cs: np.ndarray, tail_budget: float) -> np.ndarray:
    """For Bin(c, 1/2), the largest k_lo per c with P(A < k_lo) <= tail_budget.

    The retained window [k_lo, c - k_lo] is symmetric, so the excluded mass
    is exactly twice the lower tail.
    """
    cs = np.asarray(cs, dtype=np.int64)
    log_budget = math.log(tail_budget)
    k_lo = np.asarray(binom.ppf(tail_budget, cs, 0.5), dtype=float)
    k_lo = np.nan_to_num(k_lo, nan=0.0).astype(np.int64)
    k_lo = np.clip(k_lo, 0, cs // 2)
    # ppf rounding can overshoot by one; walk back until the certificate holds
    for _ in range(64):
        too_high = log_binomial_cdf(k_lo - 1, cs, 0.5) > log_budget
        if not too_high.any():
            break
        k_lo = np.where(too_high, k_lo - 1, k_lo)
    return k_lo


# =======================
# Normal
# =======================
def normal_cdf(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Standard normal CDF through erfc; accurate in both tails"""
    result = special.ndtr(x)
    return float(result) if np.ndim(result) == 0 else result


def normal_pdf(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return np.exp(-0.5 * np.square(x)) / math.sqrt(2.0 * math.pi)


def _lower_quantile(u: float) -> float:
    x = float(special.ndtri(u))
    # two Newton polishing steps on the lower half, where u carries full precision
    for _ in range(2):
        density = float(normal_pdf(x))
        if density == 0.0:
            break
        x -= (float(special.ndtr(x)) - u) / density
    return x


def normal_quantile(u: float) -> float:
    """Inverse standard normal CDF on the open unit interval"""
    if not 0.0 < u < 1.0:
        raise DomainError(f"normal quantile needs u in (0, 1), got {u}")
    if u > 0.5:
        return -_lower_quantile(1.0 - u)
    return _lower_quantile(u)


# =======================
# Random streams
# =======================
def make_stream(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def split_streams(seed: int, count: int) -> List[np.random.Generator]:
    """count independent child streams of one seed; the split is deterministic"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def laplace_sample(scale: float, dim: int, rng: np.random.Generator) -> np.ndarray:
    """dim independent Laplace(0, scale) draws from an explicit stream"""
    require(scale > 0 and math.isfinite(scale), f"Laplace scale must be positive, got {scale}")
    require(int(dim) == dim and dim >= 1, f"dim must be a positive integer, got {dim}")
    return rng.laplace(loc=0.0, scale=scale, size=int(dim))


# =======================
# Multinomial counts of the other users
# =======================
def multinomial_probabilities(params: ShuffleParams) -> np.ndarray:
    p = params.p
    return np.array([p / 2.0, p / 2.0, 1.0 - p])


def multinomial_moments(params: ShuffleParams) -> MultinomialMoments:
    """Mean and covariance of the (zeros, ones, blanket) counts of n-1 users"""
    require(params.n >= 2, f"multinomial moments need n >= 2, got {params.n}")
    p = params.p
    m = params.n - 1
    mean = np.array([m * p / 2.0, m * p / 2.0, m * (1.0 - p)])
    covariance = m * np.array([
        [p / 2.0 * (1.0 - p / 2.0), -p * p / 4.0, -p * (1.0 - p) / 2.0],
        [-p * p / 4.0, p / 2.0 * (1.0 - p / 2.0), -p * (1.0 - p) / 2.0],
        [-p * (1.0 - p) / 2.0, -p * (1.0 - p) / 2.0, p * (1.0 - p)],
    ])
    return MultinomialMoments(mean=mean, covariance=covariance)


def pair_covariance(params: ShuffleParams) -> np.ndarray:
    """Covariance of the first two counts; the third is determined by them"""
    return multinomial_moments(params).covariance[:2, :2]


def pair_quadratic_form(params: ShuffleParams) -> float:
    """(mu1 - mu0)' Sigma^{-1} (mu1 - mu0) for the projected pair; equals 4/((n-1)p)"""
    require(params.n >= 2, f"quadratic form needs n >= 2, got {params.n}")
    require(params.epsilon0 > 0, "quadratic form needs epsilon0 > 0", code='singular')
    sigma = pair_covariance(params)
    if np.linalg.det(sigma) <= 0:
        raise DomainError("projected covariance is singular", code='singular')
    shift = np.array([-1.0, 1.0])
    try:
        solved = np.linalg.solve(sigma, shift)
    except np.linalg.LinAlgError as e:
        raise DomainError(f"projected covariance is singular: {e}", code='singular')
    return float(shift @ solved)
