# training/datasets.py
from dataclasses import dataclass

import numpy as np
from sklearn.datasets import make_blobs
from sklearn.preprocessing import StandardScaler

from accountant.exceptions import require


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        require(self.features.ndim == 2 and len(self.features) == len(self.labels),
                "features must be a 2-D array with one label per row")

    def __len__(self) -> int:
        return len(self.labels)


def synthetic_blobs(samples: int, features: int = 2, classes: int = 2, seed: int = 0,
                    cluster_std: float = 1.0) -> Dataset:
    """Gaussian blobs, standardized, with a trailing bias column of ones"""
    require(samples >= classes, f"need at least one sample per class, got {samples}")
    X, y = make_blobs(n_samples=samples, n_features=features, centers=classes,
                      cluster_std=cluster_std, random_state=seed)
    X = StandardScaler().fit_transform(X)
    return Dataset(features=np.hstack([X, np.ones((samples, 1))]), labels=y.astype(int))
