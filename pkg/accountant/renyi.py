# accountant/renyi.py
"""Exact Renyi divergence of the shuffled pair, by two independent routes.

renyi_direct sums P^lam Q^(1-lam) over the stored atoms. renyi_from_curve
integrates |f'|^(1-lam) over a trade-off curve, which for the exact
Neyman-Pearson curve is the same sum regrouped by likelihood ratio.
shuffle_rdp_exact runs both and refuses to answer when they disagree.
"""
import logging
import math
from typing import Iterable, List, Optional, Union

import numpy as np
from scipy import integrate, special

from .conf import setting
from .domain import RdpPoint, ShuffleParams
from .exceptions import DomainError, NumericalError, require
from .pairdist import PairPmf, build_pair
from .tradeoff import GaussianCurve, TradeoffCurve, np_curve

logger = logging.getLogger(__name__)


def _check_order(lam: float) -> float:
    require(math.isfinite(lam) and lam > 1, f"Renyi order must be a finite number > 1, got {lam}")
    return float(lam)


def _log_renyi_sum(log_u: np.ndarray, log_v: np.ndarray, lam: float) -> float:
    return float(special.logsumexp(lam * log_u + (1.0 - lam) * log_v))


def renyi_direct(P: PairPmf, Q: PairPmf, lam: float) -> RdpPoint:
    """D^lam(P || Q) over the stored atoms, with the truncation slack certified.

    The ratio P/Q is bounded by e^eps0, so the mass cut from either side moves
    the Renyi sum S by at most lam * e^(lam eps0) * neglected.
    """
    lam = _check_order(lam)
    require(P.aligned_with(Q), "P and Q must come from the same build_pair call")
    eps0 = P.params.epsilon0
    log_s = _log_renyi_sum(P.log_p, Q.log_p, lam)
    value = min(max(log_s / (lam - 1.0), 0.0), eps0)

    neglected = max(P.neglected_mass, Q.neglected_mass)
    if neglected == 0.0:
        error = 0.0
    else:
        log_slack = math.log(lam) + lam * eps0 + math.log(neglected)
        log_ratio = log_slack - log_s
        error = math.inf if log_ratio >= 0 else -math.log1p(-math.exp(log_ratio)) / (lam - 1.0)
    return RdpPoint(lam=lam, epsilon=value, error_bound=error)


def _gaussian_renyi(curve: GaussianCurve, lam: float) -> RdpPoint:
    """int_0^1 |f'|^(1-lam) with alpha = 1 - Phi(z), integrated over z.

    |f'(alpha)| = exp(mu z - mu^2/2); the integrand is divided by its closed
    form total before quadrature so the integral stays near one.
    """
    mu = curve.mu
    if mu == 0.0:
        return RdpPoint(lam=lam, epsilon=0.0)
    log_norm = lam * (lam - 1.0) * mu * mu / 2.0

    def integrand(z):
        return math.exp(-0.5 * z * z - 0.5 * math.log(2.0 * math.pi)
                        + (1.0 - lam) * (mu * z - mu * mu / 2.0) - log_norm)

    center = (1.0 - lam) * mu
    epsabs = setting('QUAD_EPSABS')
    left, _ = integrate.quad(integrand, -np.inf, center, epsabs=epsabs, epsrel=1e-12, limit=200)
    right, _ = integrate.quad(integrand, center, np.inf, epsabs=epsabs, epsrel=1e-12, limit=200)
    total = left + right
    if not total > 0:
        raise NumericalError(f"Gaussian Renyi quadrature returned {total}")
    return RdpPoint(lam=lam, epsilon=max((log_norm + math.log(total)) / (lam - 1.0), 0.0))


def renyi_from_curve(f: Union[TradeoffCurve, GaussianCurve], lam: float) -> RdpPoint:
    """(1/(lam-1)) ln sum_i w_i |s_i|^(1-lam) over the segments of f"""
    lam = _check_order(lam)
    if isinstance(f, GaussianCurve):
        return _gaussian_renyi(f, lam)

    if f.betas[0] < 1.0 - 1e-12:
        raise DomainError(f"curve starts at f(0) = {f.betas[0]} < 1; the Renyi integral needs f(0) = 1",
                          code='vertical_segment')
    if f.log_widths is not None:
        log_w, log_d = f.log_widths, f.log_drops
    else:
        widths = np.diff(f.alphas)
        drops = -np.diff(f.betas)
        with np.errstate(divide='ignore'):
            log_w, log_d = np.log(widths), np.log(drops)

    if np.any(np.isneginf(log_d) & np.isfinite(log_w)):
        logger.warning(f"flat segment makes the Renyi integral diverge at lambda={lam}")
        return RdpPoint(lam=lam, epsilon=math.inf, flags=('divergent_integrand',))
    live = np.isfinite(log_w)
    value = _log_renyi_sum(log_w[live], log_d[live], lam) / (lam - 1.0)
    return RdpPoint(lam=lam, epsilon=max(value, 0.0))


def _gate(params: ShuffleParams, forward: RdpPoint, via_curve: RdpPoint) -> None:
    gap = abs(forward.epsilon - via_curve.epsilon)
    allowed = max(setting('CONSISTENCY_TOL'), forward.error_bound)
    logger.debug(f"two-route gap eps0={params.epsilon0} n={params.n} lambda={forward.lam}: "
                 f"{gap:.3e} (allowed {allowed:.3e})")
    if gap > allowed:
        raise NumericalError(
            f"direct and curve Renyi values disagree by {gap:.3e} "
            f"(eps0={params.epsilon0}, n={params.n}, lambda={forward.lam})"
        )
    if gap > 0.1 * allowed and gap > 1e-12:
        logger.warning(f"two-route gap {gap:.3e} is within tolerance but not negligible")


def _combine(params: ShuffleParams, pair, curve: TradeoffCurve, lam: float) -> RdpPoint:
    P, Q = pair
    forward = renyi_direct(P, Q, lam)
    backward = renyi_direct(Q, P, lam)
    _gate(params, forward, renyi_from_curve(curve, lam))
    return RdpPoint(
        lam=lam,
        epsilon=max(forward.epsilon, backward.epsilon),
        error_bound=max(forward.error_bound, backward.error_bound),
    )


def shuffle_rdp_exact(params: ShuffleParams, lam: float, tail_tol: Optional[float] = None) -> RdpPoint:
    """max(D^lam(P||Q), D^lam(Q||P)) for the shuffled pair, cross-checked against the curve route"""
    lam = _check_order(lam)
    pair = build_pair(params, tail_tol)
    return _combine(params, pair, np_curve(*pair), lam)


def shuffle_rdp_profile(params: ShuffleParams, lambdas: Iterable[float],
                        tail_tol: Optional[float] = None) -> List[RdpPoint]:
    """shuffle_rdp_exact over several orders, building the pair and its curve once"""
    orders = [_check_order(lam) for lam in lambdas]
    require(len(orders) > 0, "at least one Renyi order is needed")
    pair = build_pair(params, tail_tol)
    curve = np_curve(*pair)
    return [_combine(params, pair, curve, lam) for lam in orders]
