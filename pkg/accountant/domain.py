# accountant/domain.py
"""Value types shared by the accounting modules.

All of them are frozen dataclasses validated on construction, so a value
that exists is a value that satisfies its invariants.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import require


@dataclass(frozen=True)
class ShuffleParams:
    """A shuffled epsilon0-LDP process over n users"""
    epsilon0: float
    n: int

    def __post_init__(self):
        require(math.isfinite(self.epsilon0) and self.epsilon0 >= 0,
                f"epsilon0 must be a finite nonnegative number, got {self.epsilon0}")
        require(int(self.n) == self.n and self.n >= 1, f"n must be an integer >= 1, got {self.n}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'epsilon0', float(self.epsilon0))

    @property
    def p(self) -> float:
        """Probability that another user's report is a blanket (uninformative) one"""
        return math.exp(-self.epsilon0)

    @property
    def q(self) -> float:
        """Mixture weight e^eps0 / (e^eps0 + 1)"""
        return 1.0 / (1.0 + math.exp(-self.epsilon0))

    @property
    def log_q(self) -> float:
        return -float(np.logaddexp(0.0, -self.epsilon0))

    @property
    def log_1mq(self) -> float:
        return -float(np.logaddexp(0.0, self.epsilon0))


@dataclass(frozen=True)
class BinomialSpec:
    trials: int
    success_prob: float

    def __post_init__(self):
        require(int(self.trials) == self.trials and self.trials >= 0,
                f"trials must be a nonnegative integer, got {self.trials}")
        require(0.0 <= self.success_prob <= 1.0,
                f"success_prob must lie in [0, 1], got {self.success_prob}")
        object.__setattr__(self, 'trials', int(self.trials))


@dataclass(frozen=True, eq=False)
class MultinomialMoments:
    """Mean and covariance of Multinom(n-1; p/2, p/2, 1-p)"""
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class RdpPoint:
    """(lambda, epsilon(lambda)) Renyi guarantee with certified numerical slack"""
    lam: float
    epsilon: float
    error_bound: float = 0.0
    flags: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        require(self.lam > 1, f"Renyi order must exceed 1, got {self.lam}")
        require(self.epsilon >= 0 or math.isnan(self.epsilon),
                f"epsilon must be nonnegative, got {self.epsilon}")
        require(self.error_bound >= 0, f"error_bound must be nonnegative, got {self.error_bound}")
        object.__setattr__(self, 'flags', tuple(self.flags))

    def as_dict(self) -> dict:
        return {
            'lambda': self.lam,
            'epsilon': self.epsilon,
            'error_bound': self.error_bound,
            'flags': list(self.flags),
        }


@dataclass(frozen=True)
class GdpParam:
    mu: float

    def __post_init__(self):
        require(self.mu >= 0, f"mu must be nonnegative, got {self.mu}")


@dataclass(frozen=True)
class EpsDelta:
    epsilon: float
    delta: float

    def __post_init__(self):
        require(self.epsilon >= 0, f"epsilon must be nonnegative, got {self.epsilon}")
        require(0.0 <= self.delta <= 1.0, f"delta must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate reported as value +/- stderr"""
    value: float
    stderr: float
    samples: int
    seed: int

    def __post_init__(self):
        require(self.stderr >= 0, f"stderr must be nonnegative, got {self.stderr}")
        require(self.samples > 0, f"samples must be positive, got {self.samples}")

    def as_dict(self) -> dict:
        return {'value': self.value, 'stderr': self.stderr, 'samples': self.samples, 'seed': self.seed}
