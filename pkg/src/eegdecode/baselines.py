"""Comparison classifiers run on the same latent features: shrinkage LDA
and a depth-limited decision tree."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.tree import DecisionTreeClassifier

from .errors import Degenerate, Singular
from .validation import check_labels


class ShrinkageLda(BaseEstimator, ClassifierMixin):
    """Linear discriminant with diagonal shrinkage.

    Pooled within-class covariance is blended to gamma * mu * I where
    mu is the average variance (trace / d). gamma = 1 reduces to a
    nearest-class-mean rule under that variance-scaled metric; gamma = 0
    with a singular covariance raises Singular.
    """

    def __init__(self, shrinkage=0.1):
        self.shrinkage = shrinkage

    def fit(self, X, y):
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ValueError("shrinkage must be in [0, 1]")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = check_labels(y, X.shape[0])
        if len(np.unique(y)) < 2:
            raise Degenerate("LDA needs both classes")
        n, d = X.shape
        mu0 = X[y == 0].mean(axis=0)
        mu1 = X[y == 1].mean(axis=0)
        centered = X - np.where(y[:, None] == 1, mu1, mu0)
        pooled = (centered.T @ centered) / max(n - 2, 1)
        avg_var = np.trace(pooled) / d
        cov = (1.0 - self.shrinkage) * pooled + self.shrinkage * avg_var * np.eye(d)
        try:
            w = np.linalg.solve(cov, mu1 - mu0)
        except np.linalg.LinAlgError:
            raise Singular("pooled covariance not invertible with gamma = 0")
        if not np.all(np.isfinite(w)) or (self.shrinkage == 0.0
                                          and np.linalg.cond(cov) > 1e12):
            raise Singular("pooled covariance numerically singular with gamma = 0")
        pi0 = float((y == 0).mean())
        pi1 = 1.0 - pi0
        self.coef_ = w
        self.intercept_ = float(-w @ (mu0 + mu1) / 2.0 + np.log(pi1 / pi0))
        self.means_ = np.stack([mu0, mu1])
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)


def make_tree_baseline(seed=0, max_depth=8):
    """Single CART tree with a pinned seed, as the third baseline."""
    return DecisionTreeClassifier(max_depth=max_depth, random_state=seed)
