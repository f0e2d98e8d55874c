# accountant/bounds.py
"""Closed-form accountants: the asymptotic GDP/RDP bounds of the shuffle model,
prior bounds kept for comparison, and the GDP/RDP conversion toolbox."""
import math
from typing import Iterable, List

import numpy as np
from scipy import optimize, special

from .domain import EpsDelta, GdpParam, RdpPoint, ShuffleParams
from .exceptions import DomainError, NumericalError, require

APPROXIMATE_REFERENCE = 'approximate_reference'


def _check_order(lam: float, minimum: float = 1.0, strict: bool = True) -> float:
    ok = lam > minimum if strict else lam >= minimum
    require(math.isfinite(lam) and ok,
            f"Renyi order must be {'>' if strict else '>='} {minimum:g}, got {lam}")
    return float(lam)


# =======================
# Shuffle-model bounds
# =======================
def theorem2_gdp(params: ShuffleParams) -> GdpParam:
    """mu = 2 e^(eps0/2) / sqrt(n-1)"""
    require(params.n >= 2, f"the GDP bound needs n >= 2, got {params.n}")
    return GdpParam(mu=2.0 * math.exp(params.epsilon0 / 2.0) / math.sqrt(params.n - 1))


def corollary2_rdp(params: ShuffleParams, lam: float) -> RdpPoint:
    """(lam, 2 e^eps0 lam / (n-1)), obtained as the RDP image of theorem2_gdp"""
    lam = _check_order(lam, 2.0, strict=False)
    return gdp_to_rdp(theorem2_gdp(params), lam)


def theorem3_rdp(epsilon0: float, epochs: int, blocks: int, lam: float) -> RdpPoint:
    """Shuffled SGD over `epochs` passes of `blocks` blocks: 2 T e^eps0 lam / (m-1)"""
    lam = _check_order(lam, 2.0, strict=False)
    require(int(epochs) == epochs and epochs >= 1, f"epochs must be a positive integer, got {epochs}")
    require(int(blocks) == blocks and blocks >= 2, f"blocks must be an integer >= 2, got {blocks}")
    require(epsilon0 > 0, f"epsilon0 must be positive, got {epsilon0}")
    if math.isinf(epsilon0):
        return RdpPoint(lam=lam, epsilon=math.inf)
    return RdpPoint(lam=lam, epsilon=2.0 * epochs * math.exp(epsilon0) * lam / (blocks - 1))


def theorem3_gdp(epsilon0: float, epochs: int, blocks: int) -> GdpParam:
    """epochs-fold composition of theorem2_gdp with n = blocks"""
    require(int(epochs) == epochs and epochs >= 1, f"epochs must be a positive integer, got {epochs}")
    require(epsilon0 > 0, f"epsilon0 must be positive, got {epsilon0}")
    if math.isinf(epsilon0):
        return GdpParam(mu=math.inf)
    per_epoch = theorem2_gdp(ShuffleParams(epsilon0, blocks)).mu
    return gdp_compose([per_epoch] * int(epochs))


# =======================
# GDP toolbox
# =======================
def gdp_to_rdp(g: GdpParam, lam: float) -> RdpPoint:
    lam = _check_order(lam)
    return RdpPoint(lam=lam, epsilon=0.5 * g.mu * g.mu * lam)


def _raw_delta(mu: float, epsilon: float) -> float:
    first = special.ndtr(-epsilon / mu + mu / 2.0)
    second = math.exp(epsilon + special.log_ndtr(-epsilon / mu - mu / 2.0))
    return float(first - second)


def gdp_to_eps_delta(g: GdpParam, epsilon: float) -> EpsDelta:
    """delta(eps) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2)"""
    require(epsilon >= 0, f"epsilon must be nonnegative, got {epsilon}")
    if g.mu == 0.0:
        return EpsDelta(epsilon=epsilon, delta=0.0)
    raw = _raw_delta(g.mu, epsilon)
    if not -1e-12 <= raw <= 1.0 + 1e-12:
        raise NumericalError(f"delta({epsilon}) evaluated to {raw} for mu={g.mu}")
    return EpsDelta(epsilon=epsilon, delta=min(max(raw, 0.0), 1.0))


def eps_from_mu(g: GdpParam, delta: float) -> float:
    """Smallest epsilon with delta(epsilon) <= delta"""
    require(0.0 < delta < 1.0, f"delta must lie in (0, 1), got {delta}")
    if g.mu == 0.0 or gdp_to_eps_delta(g, 0.0).delta <= delta:
        return 0.0
    upper = 500.0
    while gdp_to_eps_delta(g, upper).delta > delta:
        upper *= 2.0
    return float(optimize.brentq(lambda eps: _raw_delta(g.mu, eps) - delta, 0.0, upper, xtol=1e-14))


def gdp_compose(mus: Iterable[float]) -> GdpParam:
    values = [float(mu) for mu in mus]
    require(all(mu >= 0 for mu in values), f"every mu must be nonnegative, got {values}")
    return GdpParam(mu=math.sqrt(math.fsum(mu * mu for mu in values)))


# =======================
# Prior bounds
# =======================
def girgis_upper(params: ShuffleParams, lam: float) -> RdpPoint:
    """Upper bound for integer orders:
    (1/(lam-1)) ln( exp(lam^2 (e^eps0 - 1)^2 / nbar) + exp(eps0 lam - (n-1)/(8 e^eps0)) )
    with nbar = floor((n-1) / (2 e^eps0)) + 1.
    """
    if not (float(lam).is_integer() and lam >= 2):
        raise DomainError(f"this bound is stated for integer orders >= 2, got {lam}", code='not_integer')
    require(params.n >= 2, f"the bound needs n >= 2, got {params.n}")
    lam = float(lam)
    eps0 = params.epsilon0
    n_bar = math.floor((params.n - 1) / (2.0 * math.exp(eps0))) + 1
    log_terms = np.array([
        lam * lam * math.expm1(eps0) ** 2 / n_bar,
        eps0 * lam - (params.n - 1) / (8.0 * math.exp(eps0)),
    ])
    return RdpPoint(lam=lam, epsilon=max(float(special.logsumexp(log_terms)) / (lam - 1.0), 0.0),
                    flags=('integer_order_only',))


def girgis_lower(params: ShuffleParams, lam: float) -> RdpPoint:
    """(1/(lam-1)) ln(1 + lam (lam-1) (e^eps0 - 1)^2 / (2 n e^eps0))"""
    lam = _check_order(lam)
    eps0 = params.epsilon0
    inner = lam * (lam - 1.0) * math.expm1(eps0) ** 2 / (2.0 * params.n * math.exp(eps0))
    return RdpPoint(lam=lam, epsilon=math.log1p(inner) / (lam - 1.0))


def feldman_ref(params: ShuffleParams, lam: float) -> RdpPoint:
    """64 e^eps0 lam / n; an order-level reference, not a certified bound"""
    lam = _check_order(lam)
    return RdpPoint(lam=lam, epsilon=64.0 * math.exp(params.epsilon0) * lam / params.n,
                    flags=(APPROXIMATE_REFERENCE,))


# =======================
# RDP toolbox
# =======================
def rdp_to_eps_delta(point: RdpPoint, delta: float) -> EpsDelta:
    """eps = eps(lam) + ln(1/delta) / (lam - 1)"""
    require(0.0 < delta < 1.0, f"delta must lie in (0, 1), got {delta}")
    return EpsDelta(epsilon=point.epsilon + math.log(1.0 / delta) / (point.lam - 1.0), delta=delta)


def rdp_best_eps(points: Iterable[RdpPoint], delta: float) -> EpsDelta:
    candidates: List[EpsDelta] = [rdp_to_eps_delta(point, delta) for point in points]
    require(len(candidates) > 0, "at least one RDP point is needed")
    return min(candidates, key=lambda ed: ed.epsilon)


def rdp_compose(points: Iterable[RdpPoint]) -> RdpPoint:
    """Composition at a common order: epsilons and error bounds add"""
    points = list(points)
    require(len(points) > 0, "at least one RDP point is needed")
    orders = {point.lam for point in points}
    require(len(orders) == 1, f"composition needs a common order, got {sorted(orders)}", code='mixed_orders')
    flags = tuple(sorted({flag for point in points for flag in point.flags}))
    return RdpPoint(
        lam=points[0].lam,
        epsilon=math.fsum(point.epsilon for point in points),
        error_bound=math.fsum(point.error_bound for point in points),
        flags=flags,
    )
