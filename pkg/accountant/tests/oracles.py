"""Brute-force references built from exact binomial weights (math.comb).

Only usable for small n; the library never calls these.
"""
import math
from collections import defaultdict
from fractions import Fraction

# tail budget small enough that build_pair keeps every outcome for n <= 12
FULL_ENUMERATION_TOL = 1e-300


def enumerate_pair(epsilon0, n):
    """{(a, b): mass} for P and Q from every (C, A, Delta) outcome"""
    p = math.exp(-epsilon0)
    q = 1.0 / (1.0 + math.exp(-epsilon0))
    P, Q = defaultdict(float), defaultdict(float)
    for c in range(n):
        p_c = math.comb(n - 1, c) * p ** c * (1.0 - p) ** (n - 1 - c)
        for k in range(c + 1):
            w = p_c * math.comb(c, k) / 2 ** c
            P[(k + 1, c - k)] += q * w
            P[(k, c - k + 1)] += (1.0 - q) * w
            Q[(k + 1, c - k)] += (1.0 - q) * w
            Q[(k, c - k + 1)] += q * w
    return dict(P), dict(Q)


def renyi_sum(P, Q, lam):
    """(1/(lam-1)) ln sum P^lam Q^(1-lam)"""
    total = math.fsum(P[atom] ** lam * Q[atom] ** (1.0 - lam) for atom in P)
    return math.log(total) / (lam - 1.0)


def np_breakpoints(P, Q, epsilon0):
    """Neyman-Pearson breakpoints, atoms grouped by their reduced ratio b/a"""
    groups = defaultdict(lambda: [0.0, 0.0])
    for (a, b), mass in P.items():
        key = Fraction(b, a) if a else math.inf
        groups[key][0] += mass
        groups[key][1] += Q[(a, b)]
    # Q/P = (a + e^eps b)/(e^eps a + b) increases with b/a
    ordered = sorted(groups.items(), key=lambda item: item[0], reverse=True)
    alphas, betas = [0.0], [1.0]
    for _, (p_mass, q_mass) in ordered:
        alphas.append(alphas[-1] + p_mass)
        betas.append(betas[-1] - q_mass)
    return alphas, betas
