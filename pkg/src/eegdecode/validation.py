"""Input validation helpers shared by the estimator-style classes and ops."""

import numpy as np

from .errors import NonFinite


def as_float_array(x, name="x", ndim=None, dtype=np.float64):
    """Coerce to a float ndarray, checking dimensionality and finiteness."""
    arr = np.asarray(x, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} contains NaN/Inf")
    return arr


def check_window_batch(X, n_channels=12, n_samples=250, dtype=np.float64):
    """Validate a batch of analysis windows, shape [B, n_channels, n_samples].

    A single window [n_channels, n_samples] is promoted to a batch of one.
    """
    X = as_float_array(X, "windows", dtype=dtype)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1] != n_channels or X.shape[2] != n_samples:
        raise ValueError(
            f"expected windows of shape [B, {n_channels}, {n_samples}], got {X.shape}"
        )
    return X


def check_labels(y, n=None):
    """Validate binary labels in {0, 1}."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-D, got shape {y.shape}")
    if n is not None and len(y) != n:
        raise ValueError(f"expected {n} labels, got {len(y)}")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 (rest) or 1 (move)")
    return y.astype(np.int64)


def check_weights(w, n):
    """Validate a normalized non-negative sample weight vector."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError(f"weights must have shape ({n},), got {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if not np.isclose(w.sum(), 1.0, atol=1e-8):
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w
