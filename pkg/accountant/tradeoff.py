# accountant/tradeoff.py
"""Hypothesis-testing trade-off curves between the shuffled pair.

A curve maps a type-I error alpha to the smallest achievable type-II error.
Exact curves built from a PairPmf keep the per-segment masses in log space
next to the breakpoints: the Renyi integral over a curve only needs the
segment widths and drops, and differencing cumulative sums would lose them
for the tiny segments in the tails.
"""
import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special

from .conf import setting
from .dist import log_binomial_pmf_array, log_half_binomial_pmf
from .domain import BinomialSpec, ShuffleParams
from .exceptions import DomainError, NumericalError, require
from .pairdist import PairPmf, build_pair, log_ratios

logger = logging.getLogger(__name__)

BREAKPOINT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TradeoffCurve:
    """Convex nonincreasing piecewise-linear curve from (0, beta0) to (1, 0).

    log_widths / log_drops, when present, are the natural logs of the
    normalized P-mass and Q-mass of each segment.
    """
    alphas: np.ndarray
    betas: np.ndarray
    log_widths: Optional[np.ndarray] = None
    log_drops: Optional[np.ndarray] = None

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        betas = np.asarray(self.betas, dtype=float)
        object.__setattr__(self, 'alphas', alphas)
        object.__setattr__(self, 'betas', betas)
        require(alphas.ndim == 1 and alphas.shape == betas.shape and alphas.size >= 2,
                "a curve needs at least two breakpoints")
        require(alphas[0] == 0.0 and alphas[-1] == 1.0, "a curve must span alpha in [0, 1]")
        require(bool(np.all(np.diff(alphas) > 0)), "alphas must be strictly increasing")
        require(bool(np.all(np.diff(betas) <= 0)), "betas must be nonincreasing")
        require(betas[-1] == 0.0 and 0.0 <= betas[0] <= 1.0, "betas must run from at most 1 down to 0")
        require(bool(np.all(betas <= 1.0 - alphas + BREAKPOINT_TOL)),
                "a trade-off curve never exceeds 1 - alpha")
        if (self.log_widths is None) != (self.log_drops is None):
            raise DomainError("log_widths and log_drops come together")

    @property
    def breakpoints(self) -> List[Tuple[float, float]]:
        return list(zip(self.alphas.tolist(), self.betas.tolist()))

    def slopes(self) -> np.ndarray:
        return np.diff(self.betas) / np.diff(self.alphas)

    def is_convex(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.slopes()) >= -tol))

    def __call__(self, alpha):
        return curve_eval(self, alpha)


class GaussianCurve:
    """alpha -> Phi(Phi^-1(1 - alpha) - mu), the trade-off between N(0,1) and N(mu,1)"""

    def __init__(self, mu: float):
        require(math.isfinite(mu) and mu >= 0, f"mu must be a finite nonnegative number, got {mu}")
        self.mu = float(mu)

    def __repr__(self):
        return f"GaussianCurve(mu={self.mu})"

    def __call__(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if np.any((alpha < 0) | (alpha > 1)):
            raise DomainError("alpha must lie in [0, 1]")
        # Phi^-1(1 - alpha) = -Phi^-1(alpha) keeps full precision for small alpha
        result = special.ndtr(-special.ndtri(alpha) - self.mu)
        return float(result) if result.ndim == 0 else result

    def to_piecewise(self, tol: Optional[float] = None, max_depth: int = 60) -> TradeoffCurve:
        """Chord interpolation refined by bisection until every chord is within tol"""
        tol = setting('GAUSSIAN_CURVE_TOL') if tol is None else tol
        if self.mu == 0.0:
            return TradeoffCurve(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        done_lo, done_hi = [], []
        lo = np.array([0.0])
        hi = np.array([1.0])
        for _ in range(max_depth):
            if lo.size == 0:
                break
            f_lo, f_hi = self(lo), self(hi)
            probes = [lo + (hi - lo) * frac for frac in (0.25, 0.5, 0.75)]
            gaps = np.max([
                f_lo + (f_hi - f_lo) * frac - self(x)
                for frac, x in zip((0.25, 0.5, 0.75), probes)
            ], axis=0)
            # the chord error is concave, so it never exceeds twice the largest probe gap
            fine = gaps <= tol / 2.0
            done_lo.append(lo[fine])
            done_hi.append(hi[fine])
            mid = probes[1][~fine]
            lo = np.concatenate((lo[~fine], mid))
            hi = np.concatenate((mid, hi[~fine]))
        done_lo.append(lo)
        done_hi.append(hi)
        alphas = np.unique(np.concatenate(done_lo + done_hi + [np.array([0.0, 1.0])]))
        betas = np.asarray(self(alphas), dtype=float)
        betas[0], betas[-1] = 1.0, 0.0
        return TradeoffCurve(alphas, np.minimum.accumulate(betas))


def gaussian_curve(mu: float) -> GaussianCurve:
    return GaussianCurve(mu)


def _curve_from_log_segments(log_widths: np.ndarray, log_drops: np.ndarray) -> TradeoffCurve:
    widths = np.exp(log_widths)
    drops = np.exp(log_drops)
    alphas = np.minimum(np.concatenate(([0.0], np.cumsum(widths))), 1.0)
    betas = np.minimum(np.concatenate((np.cumsum(drops[::-1])[::-1], [0.0])), 1.0)
    alphas[-1], betas[0] = 1.0, 1.0
    # segments too thin to move alpha in double precision collapse into their neighbour
    keep = np.concatenate((np.diff(alphas) > 0, [True]))
    alphas, betas = alphas[keep], betas[keep]
    betas[0], betas[-1] = 1.0, 0.0
    return TradeoffCurve(alphas, betas, log_widths, log_drops)


def np_curve(P: PairPmf, Q: PairPmf, tie_tol: Optional[float] = None) -> TradeoffCurve:
    """Exact trade-off T(P, Q) including randomization between atoms.

    Atoms are ranked by Q/P descending; atoms whose log-ratios agree within
    tie_tol form one segment.
    """
    if len(P) == 0:
        raise DomainError("cannot build a curve over an empty support", code='empty_support')
    tie_tol = setting('TIE_LOG_TOL') if tie_tol is None else tie_tol
    ratios = log_ratios(P, Q)
    order = np.argsort(-ratios, kind='stable')
    sorted_ratios = ratios[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(sorted_ratios) < -tie_tol) + 1))
    log_w = np.logaddexp.reduceat(P.log_p[order], starts)
    log_d = np.logaddexp.reduceat(Q.log_p[order], starts)
    log_w -= special.logsumexp(log_w)
    log_d -= special.logsumexp(log_d)
    curve = _curve_from_log_segments(log_w, log_d)
    logger.debug(f"np_curve: {len(P)} atoms merged into {starts.size} segments")
    return curve


# =======================
# Threshold (closed) form
# =======================
def _ratio_keys(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.where(b == 0, np.inf, a / np.where(b == 0, 1, b))


def _threshold_correction(params: ShuffleParams, t_num: int, t_den: int) -> float:
    """sum_v P(C=v) P(A = K_v | C=v), K_v = floor(t (v+1) / (1+t)), with t = t_num / t_den.

    This is the telescoped difference between the threshold test's type-II
    error and 1 - alpha, divided by the mixture contrast (1-p)/(1+p).
    """
    vs = np.arange(params.n, dtype=np.int64)
    if t_den == 0:
        return 0.0
    ks = (t_num * (vs + 1)) // (t_num + t_den)
    inside = ks <= vs
    if not inside.any():
        return 0.0
    log_pc = log_binomial_pmf_array(vs[inside], BinomialSpec(params.n - 1, params.p))
    log_terms = log_pc + log_half_binomial_pmf(vs[inside], ks[inside])
    return float(np.exp(special.logsumexp(log_terms)))


def h_closed_form(params: ShuffleParams, alpha_grid: Iterable[float],
                  tail_tol: Optional[float] = None) -> List[Tuple[float, float]]:
    """Threshold-test curve evaluated as a conservative step on a grid.

    The statistic is s = a/b (b = 0 gives +inf). With Q as the null,
    alpha(t) = Q(s > t) = (1-q) P((A+1)/(C-A) > t) + q P(A/(C-A+1) > t) and
    beta(t) = P(s <= t) = q P((A+1)/(C-A) <= t) + (1-q) P(A/(C-A+1) <= t).
    For each grid alpha, t = g(alpha) = inf{t : alpha(t) <= alpha} and the
    point returned is (alpha, beta(t)).
    """
    grid = np.asarray(list(alpha_grid), dtype=float)
    require(grid.ndim == 1 and bool(np.all((grid >= 0) & (grid <= 1))), "alpha grid must lie in [0, 1]")
    contrast = (1.0 - params.p) / (1.0 + params.p)
    if contrast == 0.0:
        # the statistic carries no information: beta = 1 - alpha exactly
        return [(alpha, 1.0 - alpha) for alpha in grid.tolist()]
    P, Q = build_pair(params, tail_tol)
    keys = _ratio_keys(P.a, P.b)
    values, inverse = np.unique(keys, return_inverse=True)
    mass_p = np.bincount(inverse, weights=np.exp(P.log_p), minlength=values.size)
    mass_q = np.bincount(inverse, weights=np.exp(Q.log_p), minlength=values.size)
    mass_p /= mass_p.sum()
    mass_q /= mass_q.sum()

    # candidate thresholds: -inf followed by the achievable statistic values
    beta_at = np.concatenate(([0.0], np.minimum(np.cumsum(mass_p), 1.0)))
    alpha_at = np.concatenate(([1.0], np.clip(1.0 - np.cumsum(mass_q), 0.0, 1.0)))
    alpha_at = np.minimum.accumulate(alpha_at)
    index = np.searchsorted(-alpha_at, -(grid + BREAKPOINT_TOL), side='left')
    index = np.minimum(index, alpha_at.size - 1)

    tol = setting('CONSISTENCY_TOL')
    a_rep = np.zeros(values.size, dtype=np.int64)
    b_rep = np.zeros(values.size, dtype=np.int64)
    a_rep[inverse] = P.a
    b_rep[inverse] = P.b
    points = []
    for alpha, k in zip(grid.tolist(), index.tolist()):
        beta = float(beta_at[k])
        if k > 0:
            correction = _threshold_correction(params, int(a_rep[k - 1]), int(b_rep[k - 1]))
            residual = abs(beta - (1.0 - alpha_at[k] - contrast * correction))
            if residual > max(tol, 4.0 * P.neglected_mass):
                raise NumericalError(f"closed form disagrees with threshold sums by {residual:.3e}")
        points.append((alpha, beta))
    return points


# =======================
# Curve algebra
# =======================
def curve_eval(f: TradeoffCurve, alpha):
    alpha_arr = np.asarray(alpha, dtype=float)
    if np.any((alpha_arr < 0) | (alpha_arr > 1)) or np.any(np.isnan(alpha_arr)):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    result = np.interp(alpha_arr, f.alphas, f.betas)
    return float(result) if result.ndim == 0 else result


def curve_inverse(f: TradeoffCurve) -> TradeoffCurve:
    """Functional inverse, reflected across beta = alpha and extended by zero past f(0)"""
    alphas = f.betas[::-1].copy()
    betas = f.alphas[::-1].copy()
    if alphas[-1] < 1.0:
        alphas = np.concatenate((alphas, [1.0]))
        betas = np.concatenate((betas, [0.0]))
    # a flat run at beta = 0 reflects onto one alpha; the inverse takes its smallest value
    keep = np.concatenate((np.diff(alphas) > 0, [True]))
    return TradeoffCurve(alphas[keep], betas[keep])


def _lower_hull(xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    hull: List[int] = []
    for i in range(xs.size):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o])
            if cross > 0:
                break
            hull.pop()
        hull.append(i)
    return xs[hull], ys[hull]


def curve_symmetrize(f: TradeoffCurve) -> TradeoffCurve:
    """min(f, f^-1) re-convexified by its lower convex envelope"""
    inverse = curve_inverse(f)
    grid = np.union1d(f.alphas, inverse.alphas)
    values = np.minimum(np.interp(grid, f.alphas, f.betas), np.interp(grid, inverse.alphas, inverse.betas))
    alphas, betas = _lower_hull(grid, values)
    return TradeoffCurve(alphas, betas)


def curve_frame(points: Sequence[Tuple[float, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(points), columns=['alpha', 'beta'])


def curve_to_csv(f, target=None, grid: Optional[Sequence[float]] = None) -> Optional[str]:
    """Write (alpha, beta) rows to target, or return them as text when target is None.

    f is a piecewise curve (its breakpoints, or its values on grid), an analytic
    GaussianCurve (sampled on grid, or its piecewise approximation), or a
    sequence of (alpha, beta) points written as given.
    """
    if isinstance(f, TradeoffCurve):
        points = f.breakpoints if grid is None else [(float(a), curve_eval(f, a)) for a in grid]
    elif isinstance(f, GaussianCurve):
        points = f.to_piecewise().breakpoints if grid is None else [(float(a), float(f(a))) for a in grid]
    else:
        points = list(f)
    return curve_frame(points).to_csv(target, index=False)
