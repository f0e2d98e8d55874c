# training/losses.py
"""Per-example losses with per-example gradients.

Parameters are always a flat vector; the softmax loss reshapes it into a
(features, classes) weight matrix.
"""
import numpy as np
from scipy import special

from accountant.exceptions import DomainError, require


class Loss:
    name = 'loss'

    def dim(self, features: int) -> int:
        return features

    def values(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradients(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """One gradient row per example"""
        raise NotImplementedError

    def predict(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.values(theta, X, y)))


class LogisticLoss(Loss):
    """Binary cross-entropy on labels in {0, 1}"""
    name = 'logistic'

    def values(self, theta, X, y):
        z = X @ theta
        return np.logaddexp(0.0, z) - y * z

    def gradients(self, theta, X, y):
        return (special.expit(X @ theta) - y)[:, None] * X

    def predict(self, theta, X):
        return (X @ theta > 0).astype(int)


class SoftmaxCrossEntropy(Loss):
    name = 'softmax'

    def __init__(self, classes: int):
        require(int(classes) == classes and classes >= 2, f"classes must be an integer >= 2, got {classes}")
        self.classes = int(classes)

    def dim(self, features: int) -> int:
        return features * self.classes

    def _logits(self, theta, X):
        return X @ theta.reshape(X.shape[1], self.classes)

    def values(self, theta, X, y):
        logits = self._logits(theta, X)
        return special.logsumexp(logits, axis=1) - logits[np.arange(len(y)), y]

    def gradients(self, theta, X, y):
        residual = special.softmax(self._logits(theta, X), axis=1)
        residual[np.arange(len(y)), y] -= 1.0
        return (X[:, :, None] * residual[:, None, :]).reshape(len(y), -1)

    def predict(self, theta, X):
        return np.argmax(self._logits(theta, X), axis=1)


class SquaredLoss(Loss):
    """0.5 (x . theta - y)^2"""
    name = 'squared'

    def values(self, theta, X, y):
        return 0.5 * np.square(X @ theta - y)

    def gradients(self, theta, X, y):
        return (X @ theta - y)[:, None] * X

    def predict(self, theta, X):
        return X @ theta


def get_loss(name: str, classes: int = 2) -> Loss:
    if name == 'logistic':
        return LogisticLoss()
    if name == 'softmax':
        return SoftmaxCrossEntropy(classes)
    if name == 'squared':
        return SquaredLoss()
    raise DomainError(f"unknown loss {name!r}; choose logistic, softmax or squared", code='unknown_loss')
