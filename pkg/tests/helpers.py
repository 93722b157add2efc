import numpy as np

from reefgpr.dataset import ReefDataset, SchemaConfig


def make_dataset(X, y, names=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names = names or [f"x{j}" for j in range(X.shape[1])]
    return ReefDataset(SchemaConfig.for_features(names), X, np.asarray(y, dtype=float))
