# accountant/pairdist.py
"""The two mixture distributions P and Q behind a shuffled epsilon0-LDP process.

With p = e^-eps0, C ~ Bin(n-1, p) counts the other users whose reports carry
no information and A | C ~ Bin(C, 1/2) splits them. Delta ~ Bern(q) with
q = e^eps0 / (e^eps0 + 1) decides which side the distinguished user lands on:

    P ~ (A + Delta, C - A + 1 - Delta)
    Q ~ (A + 1 - Delta, C - A + Delta)

Every atom (a, b) satisfies a + b = C + 1, so atoms from different values of
C never collide and each atom collects mass from two neighbouring (C, A) cells.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import special

from .conf import setting
from .dist import (
    central_window,
    log_binomial_cdf,
    log_binomial_pmf_array,
    log_half_binomial_pmf,
    symmetric_half_windows,
)
from .domain import BinomialSpec, ShuffleParams
from .exceptions import DomainError, require

logger = logging.getLogger(__name__)

SIDES = ('P', 'Q')
MAX_TAIL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class PairPmf:
    """Truncated PMF over integer pairs, stored as aligned arrays.

    The P and Q members of one build_pair call share the same atom order,
    which is what the divergence and curve code relies on.
    """
    a: np.ndarray
    b: np.ndarray
    log_p: np.ndarray
    neglected_mass: float
    side: str
    params: ShuffleParams

    def __post_init__(self):
        require(self.side in SIDES, f"side must be one of {SIDES}, got {self.side!r}")
        require(self.a.shape == self.b.shape == self.log_p.shape,
                "atom arrays must share one shape")
        for arr in (self.a, self.b, self.log_p):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.a.size)

    @cached_property
    def entries(self) -> Dict[Tuple[int, int], float]:
        return {(int(a), int(b)): float(lp) for a, b, lp in zip(self.a, self.b, self.log_p)}

    def log_mass(self, a: int, b: int) -> float:
        try:
            return self.entries[(int(a), int(b))]
        except KeyError:
            raise DomainError(f"atom ({a}, {b}) is outside the stored support", code='not_in_support')

    def total_mass(self) -> float:
        return float(np.exp(special.logsumexp(self.log_p))) if len(self) else 0.0

    def aligned_with(self, other: 'PairPmf') -> bool:
        return (self.params == other.params
                and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'a': self.a, 'b': self.b, 'log_p': self.log_p})

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


def _check_tail_tol(tail_tol: float) -> float:
    require(isinstance(tail_tol, (int, float)) and 0.0 < tail_tol <= MAX_TAIL_TOL,
            f"tail_tol must lie in (0, {MAX_TAIL_TOL}], got {tail_tol}")
    return float(tail_tol)


def _cells_to_atoms(cs: np.ndarray, k_los: np.ndarray, log_pcs: np.ndarray, log_q: float, log_1mq: float):
    """Atoms for a run of consecutive C values; order is by c, then by a"""
    a_parts, b_parts, p_parts, q_parts = [], [], [], []
    for c, k_lo, log_pc in zip(cs.tolist(), k_los.tolist(), log_pcs.tolist()):
        ks = np.arange(k_lo, c - k_lo + 1)
        cell = log_pc + log_half_binomial_pmf(c, ks)
        prev = np.concatenate(([-np.inf], cell))
        cur = np.concatenate((cell, [-np.inf]))
        a = np.arange(k_lo, c - k_lo + 2)
        log_p = np.logaddexp(log_q + prev, log_1mq + cur)
        log_q_side = np.logaddexp(log_1mq + prev, log_q + cur)
        keep = np.isfinite(log_p)
        a_parts.append(a[keep])
        b_parts.append(c + 1 - a[keep])
        p_parts.append(log_p[keep])
        q_parts.append(log_q_side[keep])
    if not a_parts:
        empty = np.array([], dtype=float)
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64), empty, empty
    return (np.concatenate(a_parts), np.concatenate(b_parts),
            np.concatenate(p_parts), np.concatenate(q_parts))


def build_pair(params: ShuffleParams, tail_tol: Optional[float] = None,
               workers: Optional[int] = None) -> Tuple[PairPmf, PairPmf]:
    """Materialize (P, Q) with a certified bound on the truncated mass.

    C is cut to a central window whose two tails each hold at most tail_tol/4;
    for every retained c, A is cut to the symmetric window [k_lo, c - k_lo]
    whose tails each hold at most tail_tol/4. The neglected mass is the exact
    sum of what was cut.
    """
    tail_tol = _check_tail_tol(setting('DEFAULT_TAIL_TOL') if tail_tol is None else tail_tol)
    workers = workers or setting('WORKERS')
    budget = tail_tol / 4.0

    log_pc_all = log_binomial_pmf_array(np.arange(params.n), BinomialSpec(params.n - 1, params.p))
    lo, hi, log_excluded_c = central_window(log_pc_all, budget)
    cs = np.arange(lo, hi + 1, dtype=np.int64)
    log_pcs = log_pc_all[lo:hi + 1]
    k_los = symmetric_half_windows(cs, budget)

    with np.errstate(divide='ignore'):
        log_excluded_a = log_pcs + math.log(2.0) + log_binomial_cdf(k_los - 1, cs, 0.5)
        neglected = float(np.exp(np.logaddexp(log_excluded_c, special.logsumexp(log_excluded_a))))

    chunks = [chunk for chunk in np.array_split(np.arange(cs.size), max(1, min(workers, cs.size))) if chunk.size]
    with ThreadPoolExecutor(max_workers=max(1, len(chunks))) as pool:
        parts = list(pool.map(
            lambda idx: _cells_to_atoms(cs[idx], k_los[idx], log_pcs[idx], params.log_q, params.log_1mq),
            chunks,
        ))

    a = np.concatenate([part[0] for part in parts]).astype(np.int64)
    b = np.concatenate([part[1] for part in parts]).astype(np.int64)
    log_p = np.concatenate([part[2] for part in parts])
    log_q = np.concatenate([part[3] for part in parts])
    if a.size == 0:
        raise DomainError("pair construction produced an empty support", code='empty_support')

    logger.debug(f"build_pair eps0={params.epsilon0} n={params.n}: c in [{lo}, {hi}], "
                 f"{a.size} atoms, neglected={neglected:.3e}")
    return (PairPmf(a, b, log_p, neglected, 'P', params),
            PairPmf(a.copy(), b.copy(), log_q, neglected, 'Q', params))


def log_mixture_ratio(a, b, epsilon0: float) -> np.ndarray:
    """ln Q(a,b)/P(a,b) for untruncated atoms: ln (a + e^eps0 b) - ln (e^eps0 a + b).

    Depends on (a, b) only through b/a, so proportional pairs tie exactly
    once reduced by their gcd.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide='ignore'):
        log_a = np.log(a)
        log_b = np.log(b)
    return np.logaddexp(log_a, epsilon0 + log_b) - np.logaddexp(epsilon0 + log_a, log_b)


def likelihood_ratio(a: int, b: int, params: ShuffleParams, pair: Tuple[PairPmf, PairPmf]) -> float:
    """Q(a,b)/P(a,b) read from the stored masses"""
    P, Q = pair
    require(P.params == params and Q.params == params, "pair was built for different parameters")
    log_ratio = Q.log_mass(a, b) - P.log_mass(a, b)
    # boundary atoms of a truncated window sit exactly on the cap
    log_ratio = min(max(log_ratio, -params.epsilon0), params.epsilon0)
    return math.exp(log_ratio)


def log_ratios(P: PairPmf, Q: PairPmf) -> np.ndarray:
    """Vector of ln Q/P over the common support, clipped to [-eps0, eps0]"""
    require(P.aligned_with(Q), "P and Q must come from the same build_pair call")
    eps0 = P.params.epsilon0
    return np.clip(Q.log_p - P.log_p, -eps0, eps0)
