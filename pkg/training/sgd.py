# training/sgd.py
"""Shuffled noisy SGD for epsilon0-LDP users, its accounting and a budget planner.

Each epoch the fixed blocks are visited in a fresh random order. Before a
block is used, Laplace noise of scale 2*clip/(epsilon0*m) is drawn per
coordinate; the update is

    theta <- theta - eta * ((1/m) * sum_j clipped_grad_j + noise)

with the clipped gradients summed over the block and divided by the number
of blocks m, not by the block size. The l1 sensitivity 2*clip/m of each
block release is what the accounting assumes.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from accountant.bounds import theorem3_gdp, theorem3_rdp
from accountant.dist import laplace_sample, make_stream, split_streams
from accountant.domain import GdpParam, RdpPoint
from accountant.exceptions import DomainError, require

from .datasets import Dataset
from .losses import Loss

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class SgdConfig:
    eta: float
    epochs: int
    blocks: int
    clip: float
    epsilon0: float
    dim: int
    seed: int
    permutation_seed: Optional[int] = None

    def __post_init__(self):
        require(math.isfinite(self.eta) and self.eta > 0, f"eta must be positive, got {self.eta}")
        require(int(self.epochs) == self.epochs and self.epochs >= 1,
                f"epochs must be a positive integer, got {self.epochs}")
        require(int(self.blocks) == self.blocks and self.blocks >= 2,
                f"blocks must be an integer >= 2, got {self.blocks}")
        require(math.isfinite(self.clip) and self.clip > 0, f"clip must be positive, got {self.clip}")
        require(self.epsilon0 > 0, f"epsilon0 must be positive (inf disables noise), got {self.epsilon0}")
        require(int(self.dim) == self.dim and self.dim >= 1, f"dim must be a positive integer, got {self.dim}")

    @property
    def noise_scale(self) -> float:
        """Laplace scale 2*clip/(epsilon0*m); zero when epsilon0 is infinite"""
        if math.isinf(self.epsilon0):
            return 0.0
        return 2.0 * self.clip / (self.epsilon0 * self.blocks)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SgdReport:
    final_params: np.ndarray
    loss_trace: List[Tuple[int, float]]
    privacy: RdpPoint
    gdp: GdpParam
    config: SgdConfig
    initial_loss: float
    train_accuracy: Optional[float] = None
    dropped_samples: int = 0

    def as_dict(self) -> dict:
        return {
            'config': self.config.as_dict(),
            'final_params': self.final_params.tolist(),
            'initial_loss': self.initial_loss,
            'loss_trace': [{'epoch': epoch, 'loss': loss} for epoch, loss in self.loss_trace],
            'train_accuracy': self.train_accuracy,
            'dropped_samples': self.dropped_samples,
            'privacy': {
                'rdp': self.privacy.as_dict(),
                'gdp': {'mu': self.gdp.mu},
            },
        }

    def loss_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.loss_trace, columns=['epoch', 'loss'])


def l1_clip(g: np.ndarray, clip: float) -> np.ndarray:
    """g / max(1, ||g||_1 / clip), row by row for a 2-D array"""
    require(clip > 0, f"clip must be positive, got {clip}")
    g = np.asarray(g, dtype=float)
    norms = np.sum(np.abs(g), axis=-1, keepdims=True)
    return g / np.maximum(1.0, norms / clip)


def _streams(cfg: SgdConfig) -> Tuple[np.random.Generator, np.random.Generator]:
    noise_rng, perm_rng = split_streams(cfg.seed, 2)
    if cfg.permutation_seed is not None:
        perm_rng = make_stream(cfg.permutation_seed)
    return noise_rng, perm_rng


def epoch_permutations(cfg: SgdConfig) -> List[np.ndarray]:
    """The block visiting order of every epoch of a run with this config"""
    _, perm_rng = _streams(cfg)
    return [perm_rng.permutation(cfg.blocks) for _ in range(cfg.epochs)]


def shuffled_privacy(cfg: SgdConfig, lam: float) -> Tuple[RdpPoint, GdpParam]:
    return (theorem3_rdp(cfg.epsilon0, cfg.epochs, cfg.blocks, lam),
            theorem3_gdp(cfg.epsilon0, cfg.epochs, cfg.blocks))


def run_shuffled_sgd(data: Dataset, loss: Loss, cfg: SgdConfig, lam: float,
                     theta0: Optional[np.ndarray] = None,
                     on_step: Optional[StepCallback] = None) -> SgdReport:
    require(lam >= 2, f"the shuffled SGD accountant covers orders lambda >= 2, got {lam}")
    X, y = data.features, data.labels
    require(loss.dim(X.shape[1]) == cfg.dim,
            f"dim={cfg.dim} does not match the {loss.name} loss on {X.shape[1]} features")

    block_size = len(data) // cfg.blocks
    if block_size == 0:
        raise DomainError(f"{len(data)} samples cannot fill {cfg.blocks} blocks", code='too_few_samples')
    usable = block_size * cfg.blocks
    dropped = len(data) - usable
    if dropped:
        logger.warning(f"dropping {dropped} trailing samples so {cfg.blocks} blocks hold {block_size} each")
    X, y = X[:usable], y[:usable]
    blocks = np.arange(usable).reshape(cfg.blocks, block_size)

    theta = np.zeros(cfg.dim) if theta0 is None else np.array(theta0, dtype=float)
    require(theta.shape == (cfg.dim,), f"theta0 must have shape ({cfg.dim},)")
    noise_rng, perm_rng = _streams(cfg)
    scale = cfg.noise_scale
    initial_loss = loss.mean(theta, X, y)
    loss_trace: List[Tuple[int, float]] = []

    for epoch in range(cfg.epochs):
        order = perm_rng.permutation(cfg.blocks)
        for i, block in enumerate(order):
            noise = laplace_sample(scale, cfg.dim, noise_rng) if scale > 0 else np.zeros(cfg.dim)
            idx = blocks[block]
            clipped = l1_clip(loss.gradients(theta, X[idx], y[idx]), cfg.clip)
            theta = theta - cfg.eta * (clipped.sum(axis=0) / cfg.blocks + noise)
            if on_step is not None:
                on_step(epoch, i, clipped, theta)
        epoch_loss = loss.mean(theta, X, y)
        if not math.isfinite(epoch_loss):
            logger.error(f"loss diverged at epoch {epoch + 1}")
        loss_trace.append((epoch + 1, epoch_loss))
        logger.debug(f"epoch {epoch + 1}/{cfg.epochs}: loss={epoch_loss:.6f}")

    accuracy = None
    if loss.name in ('logistic', 'softmax'):
        accuracy = float(np.mean(loss.predict(theta, X) == y))
    rdp, gdp = shuffled_privacy(cfg, lam)
    logger.info(f"shuffled SGD finished: T={cfg.epochs}, m={cfg.blocks}, eps0={cfg.epsilon0}, "
                f"final loss={loss_trace[-1][1]:.6f}, rdp eps({lam})={rdp.epsilon:.6g}")
    return SgdReport(
        final_params=theta,
        loss_trace=loss_trace,
        privacy=rdp,
        gdp=gdp,
        config=cfg,
        initial_loss=initial_loss,
        train_accuracy=accuracy,
        dropped_samples=dropped,
    )


# =======================
# Budget planning
# =======================
@dataclass(frozen=True)
class PlanResult:
    """epsilon0 meeting a target, or the reason none exists"""
    feasible: bool
    target: dict
    epochs: int
    blocks: int
    epsilon0: Optional[float] = None
    reason: str = ''
    minimal_achievable: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def plan_epsilon0(target: Union[RdpPoint, GdpParam], epochs: int, blocks: int) -> PlanResult:
    """Invert the shuffled-SGD accountant for epsilon0.

    RDP target eps at order lam: epsilon0 = ln(eps (m-1) / (2 T lam)).
    GDP target mu: epsilon0 = 2 ln(mu sqrt(m-1) / (2 sqrt(T))).
    A target the accountant cannot meet for any epsilon0 > 0 is reported as
    infeasible together with the smallest value reachable as epsilon0 -> 0+.
    """
    require(int(epochs) == epochs and epochs >= 1, f"epochs must be a positive integer, got {epochs}")
    require(int(blocks) == blocks and blocks >= 2, f"blocks must be an integer >= 2, got {blocks}")
    epochs, blocks = int(epochs), int(blocks)

    if isinstance(target, RdpPoint):
        require(target.epsilon > 0 and math.isfinite(target.epsilon),
                f"target epsilon must be positive, got {target.epsilon}")
        require(target.lam >= 2, f"target order must be >= 2, got {target.lam}")
        described = {'lambda': target.lam, 'epsilon': target.epsilon}
        argument = target.epsilon * (blocks - 1) / (2.0 * epochs * target.lam)
        floor = {'lambda': target.lam, 'epsilon': 2.0 * epochs * target.lam / (blocks - 1)}
        epsilon0 = math.log(argument) if argument > 1.0 else None
    elif isinstance(target, GdpParam):
        require(target.mu > 0 and math.isfinite(target.mu), f"target mu must be positive, got {target.mu}")
        described = {'mu': target.mu}
        argument = target.mu * math.sqrt(blocks - 1) / (2.0 * math.sqrt(epochs))
        floor = {'mu': 2.0 * math.sqrt(epochs) / math.sqrt(blocks - 1)}
        epsilon0 = 2.0 * math.log(argument) if argument > 1.0 else None
    else:
        raise DomainError(f"unsupported target {target!r}", code='unknown_target')

    if epsilon0 is None:
        logger.info(f"infeasible plan: target {described} with T={epochs}, m={blocks}; floor {floor}")
        return PlanResult(False, described, epochs, blocks, reason='infeasible', minimal_achievable=floor)
    return PlanResult(True, described, epochs, blocks, epsilon0=epsilon0, minimal_achievable=floor)
