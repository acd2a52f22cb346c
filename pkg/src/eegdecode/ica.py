"""Offline artifact removal: whitening, fixed-point ICA with a tanh
contrast, heuristic component scoring, and reconstruction with rejected
components zeroed.

This runs only in the offline/training path; the streaming path relies on
amplitude gating instead (see realtime.engine).
"""

from dataclasses import dataclass

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin

from .dsp import FRONTAL_INDEX
from .errors import BadIndex, RankDeficient
from .validation import as_float_array


@dataclass
class UnmixingModel:
    """Linear unmixing fitted on one recording's channel space."""
    mean: np.ndarray       # per-channel mean [C]
    whitener: np.ndarray   # [C x C], rows scale eigen-directions to unit var
    unmix: np.ndarray      # [k x C], applied to whitened data
    mixing: np.ndarray     # [C x k] pseudo-inverse of (unmix @ whitener)
    k: int
    converged: bool = True
    n_iter: int = 0

    def sources(self, X):
        """Component time series [k x n] for channel data [C x n]."""
        return (self.unmix @ self.whitener) @ (X - self.mean[:, None])


@dataclass
class ComponentScore:
    index: int
    kurtosis: float            # excess kurtosis of the component series
    low_freq_ratio: float      # fraction of power below 4 Hz
    spatial_frontal_ratio: float  # |mixing| weight on F7/F3/F4/F8
    verdict: str               # "neural" | "artifact"


def whiten(X, k=None):
    """Zero-mean, identity-covariance transform via eigendecomposition.

    Returns (Z, mean, whitener) with Z = whitener @ (X - mean). With
    k < n_channels the whitener keeps the top-k eigen-directions
    (dimension-reducing, [k x C]); k=None keeps all. Raises
    RankDeficient when any retained covariance eigenvalue is below
    1e-12 of the largest.
    """
    X = as_float_array(X, "X", ndim=2)
    c, n = X.shape
    if n < 10 * c:
        raise ValueError(f"need at least {10 * c} samples to whiten {c} channels")
    if k is None:
        k = c
    if not 1 <= k <= c:
        raise ValueError(f"k must lie in [1, {c}], got {k}")
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    cov = (Xc @ Xc.T) / n
    evals, evecs = np.linalg.eigh(cov)      # ascending
    evals, evecs = evals[::-1][:k], evecs[:, ::-1][:, :k]
    if evals[-1] < 1e-12 * evals[0]:
        raise RankDeficient(f"covariance eigenvalue ratio {evals[-1] / evals[0]:.3e}")
    whitener = (evecs / np.sqrt(evals)).T   # D^{-1/2} E^T, [k x C]
    Z = whitener @ Xc
    return Z, mean, whitener


def _sym_orthonormalize(W):
    """W <- (W W^T)^{-1/2} W (symmetric decorrelation)."""
    s, u = np.linalg.eigh(W @ W.T)
    return (u / np.sqrt(s)) @ u.T @ W


def fast_ica(Z, k=None, tol=1e-6, max_iter=200, seed=0, mean=None, whitener=None):
    """Symmetric fixed-point ICA with the tanh (log-cosh) contrast.

    Z must be whitened [C x n]. Convergence: max over rows of
    |1 - |<w_new, w_old>|| < tol. On hitting max_iter the best (last)
    iterate is returned with converged=False. Deterministic per seed.
    """
    Z = as_float_array(Z, "Z", ndim=2)
    c, n = Z.shape
    if k is None:
        k = c
    if k > c:
        raise ValueError(f"k={k} exceeds channel count {c}")
    rng = np.random.default_rng(seed)
    W = _sym_orthonormalize(rng.standard_normal((k, c)))

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        WZ = W @ Z                      # [k x n]
        G = np.tanh(WZ)
        G_prime = 1.0 - G**2
        W_new = (G @ Z.T) / n - G_prime.mean(axis=1)[:, None] * W
        W_new = _sym_orthonormalize(W_new)
        delta = np.max(np.abs(1.0 - np.abs(np.sum(W_new * W, axis=1))))
        W = W_new
        if delta < tol:
            converged = True
            break

    if mean is None:
        mean = np.zeros(c)
    if whitener is None:
        whitener = np.eye(c)
    total = W @ whitener
    mixing = np.linalg.pinv(total)
    return UnmixingModel(mean=np.asarray(mean, dtype=np.float64), whitener=whitener,
                         unmix=W, mixing=mixing, k=k, converged=converged, n_iter=it)


def fit_unmixing(X, k=None, tol=1e-6, max_iter=200, seed=0):
    """whiten (keeping k directions) + fast_ica on raw data [C x n]."""
    Z, mean, whitener = whiten(X, k=k)
    return fast_ica(Z, tol=tol, max_iter=max_iter, seed=seed,
                    mean=mean, whitener=whitener)


def score_components(model, X, fs, kurtosis_limit=8.0, low_freq_limit=0.6,
                     frontal_limit=0.5, frontal_index=FRONTAL_INDEX):
    """Heuristic artifact verdicts from temporal and spatial profiles.

    artifact when excess kurtosis exceeds kurtosis_limit (spiky muscle or
    cardiac activity), or when low-frequency power dominates together
    with a frontal-heavy spatial pattern (blinks); neural otherwise.
    Channel rows are assumed to follow the standard 12-electrode order
    unless frontal_index says otherwise.
    """
    S = model.sources(as_float_array(X, "X", ndim=2))
    n = S.shape[1]
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    power = np.abs(np.fft.rfft(S, axis=1)) ** 2
    total = power.sum(axis=1)
    low = power[:, freqs < 4.0].sum(axis=1)
    abs_mix = np.abs(model.mixing)
    frontal = abs_mix[list(frontal_index), :].sum(axis=0) / np.maximum(abs_mix.sum(axis=0), 1e-300)

    scores = []
    for i in range(model.k):
        kurt = float(stats.kurtosis(S[i], fisher=True, bias=True))
        lfr = float(low[i] / total[i]) if total[i] > 0 else 0.0
        sfr = float(frontal[i])
        is_artifact = kurt > kurtosis_limit or (lfr > low_freq_limit and sfr > frontal_limit)
        scores.append(ComponentScore(index=i, kurtosis=kurt, low_freq_ratio=lfr,
                                     spatial_frontal_ratio=sfr,
                                     verdict="artifact" if is_artifact else "neural"))
    return scores


def remove_components(model, X, rejected):
    """Reconstruct X with the rejected component rows zeroed."""
    rejected = sorted(set(int(i) for i in rejected))
    if any(i < 0 or i >= model.k for i in rejected):
        raise BadIndex(f"rejected indices {rejected} outside [0, {model.k})")
    X = as_float_array(X, "X", ndim=2)
    S = model.sources(X)
    S[rejected, :] = 0.0
    return model.mixing @ S + model.mean[:, None]


class IcaArtifactCleaner(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit the unmixing on [n_channels, n_samples]
    data, auto-score components, and transform by zeroing artifacts.

    An explicit `reject` index list overrides the automatic verdicts.
    """

    def __init__(self, k=None, tol=1e-6, max_iter=200, seed=0, fs=250.0,
                 kurtosis_limit=8.0, low_freq_limit=0.6, frontal_limit=0.5,
                 reject=None):
        self.k = k
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self.fs = fs
        self.kurtosis_limit = kurtosis_limit
        self.low_freq_limit = low_freq_limit
        self.frontal_limit = frontal_limit
        self.reject = reject

    def fit(self, X, y=None):
        self.model_ = fit_unmixing(X, k=self.k, tol=self.tol,
                                   max_iter=self.max_iter, seed=self.seed)
        self.scores_ = score_components(
            self.model_, X, self.fs, kurtosis_limit=self.kurtosis_limit,
            low_freq_limit=self.low_freq_limit, frontal_limit=self.frontal_limit)
        if self.reject is not None:
            self.rejected_ = sorted(set(int(i) for i in self.reject))
        else:
            self.rejected_ = [s.index for s in self.scores_ if s.verdict == "artifact"]
        return self

    def transform(self, X):
        return remove_components(self.model_, X, self.rejected_)
