"""sklearn-style wrapper: fit the autoencoder on labeled windows and
transform windows into 64-d latents."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..validation import check_labels, check_window_batch
from .network import encode, normalize_windows
from .train import TrainConfig, train_cae


class CaeEncoder(BaseEstimator, TransformerMixin):
    """Supervised convolutional autoencoder as a latent-feature extractor.

    fit() trains with a stratified validation split carved from the
    given windows; transform() returns latents of normalized windows.
    """

    def __init__(self, lam=1.0, lr=1e-3, weight_decay=1e-4, dropout=0.25,
                 batch_size=64, max_epochs=200, patience=10,
                 noise_scale=0.05, channel_dropout=0.1,
                 val_fraction=0.2, seed=0):
        self.lam = lam
        self.lr = lr
        self.weight_decay = weight_decay
        self.dropout = dropout
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.noise_scale = noise_scale
        self.channel_dropout = channel_dropout
        self.val_fraction = val_fraction
        self.seed = seed

    def _config(self):
        return TrainConfig(
            lam=self.lam, lr=self.lr, weight_decay=self.weight_decay,
            dropout=self.dropout, batch_size=self.batch_size,
            max_epochs=self.max_epochs, patience=self.patience,
            noise_scale=self.noise_scale, channel_dropout=self.channel_dropout,
            seed=self.seed)

    def fit(self, X, y):
        X = check_window_batch(X)
        y = check_labels(y, len(X))
        train_idx, val_idx = stratified_split(y, self.val_fraction, self.seed)
        self.params_, self.history_ = train_cae(X, y, (train_idx, val_idx), self._config())
        return self

    def transform(self, X):
        X = check_window_batch(X)
        return encode(self.params_, normalize_windows(X).astype(np.float32))


def stratified_split(y, val_fraction, seed):
    """Per-class shuffled split; returns (train_idx, val_idx)."""
    rng = np.random.default_rng(seed)
    y = np.asarray(y)
    train_idx, val_idx = [], []
    for cls in np.unique(y):
        ids = np.flatnonzero(y == cls)
        ids = ids[rng.permutation(len(ids))]
        n_val = max(1, int(round(val_fraction * len(ids))))
        val_idx.extend(ids[:n_val])
        train_idx.extend(ids[n_val:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(val_idx))
