"""Shared test oracles, independent of the library's implementation
paths by construction."""

import numpy as np


def fit_sinusoid(x, freq_hz, fs):
    """Least-squares amplitude/phase of a sinusoid in x."""
    t = np.arange(len(x)) / fs
    A = np.column_stack([np.sin(2 * np.pi * freq_hz * t),
                         np.cos(2 * np.pi * freq_hz * t)])
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    amp = float(np.hypot(coef[0], coef[1]))
    phase = float(np.arctan2(coef[1], coef[0]))
    return amp, phase


def bilinear_butter2_bandpass(low_hz, high_hz, fs):
    """Hand bilinear-transform design of an order-2 Butterworth
    band-pass (2-pole analog prototype), textbook route:
      1. analog low-pass prototype poles at exp(j*3pi/4), exp(j*5pi/4)
      2. low-pass -> band-pass substitution s -> (s^2 + w0^2) / (B s)
      3. bilinear transform s = 2 fs (z-1)/(z+1) with edge pre-warping
    Returns (b, a) normalized so a[0] = 1.
    """
    warp = lambda f: 2 * fs * np.tan(np.pi * f / fs)
    w1, w2 = warp(low_hz), warp(high_hz)
    w0 = np.sqrt(w1 * w2)
    bw = w2 - w1

    # prototype H(s) = 1 / (s^2 + sqrt(2) s + 1); band-pass substitution
    # gives H_bp(s) = (bw s)^2 / (q(s)) with q from substituting into the
    # prototype denominator:
    # (s^2+w0^2)^2 + sqrt(2) bw s (s^2+w0^2) + bw^2 s^2
    num_s = np.array([bw**2, 0.0, 0.0])  # (bw s)^2 -> degree 4 overall
    den_s = np.polyadd(
        np.polyadd(
            np.polymul([1, 0, w0**2], [1, 0, w0**2]),
            np.sqrt(2) * bw * np.polymul([1, 0], [1, 0, w0**2])),
        np.array([bw**2, 0, 0]))

    # bilinear: substitute s = 2 fs (z-1)/(z+1), multiply both sides by
    # (z+1)^4; evaluate polynomial coefficients by convolution
    k = 2.0 * fs
    zm1 = np.array([1.0, -1.0])   # (z - 1)
    zp1 = np.array([1.0, 1.0])    # (z + 1)

    def poly_in_z(coeffs_s):
        deg = 4
        out = np.zeros(deg + 1)
        # pad the s-polynomial to degree 4
        cs = np.concatenate([np.zeros(deg + 1 - len(coeffs_s)), coeffs_s])
        for i, c in enumerate(cs):
            p_s = deg - i  # power of s
            term = np.array([c * k**p_s])
            for _ in range(p_s):
                term = np.convolve(term, zm1)
            for _ in range(deg - p_s):
                term = np.convolve(term, zp1)
            out = np.polyadd(out, term)
        return out

    b = poly_in_z(num_s)
    a = poly_in_z(den_s)
    return b / a[0], a / a[0]


def amari_index(P):
    """Permutation/scale-invariant unmixing distance; 0 = perfect."""
    P = np.abs(np.asarray(P, dtype=np.float64))
    k = P.shape[0]
    row = (P / P.max(axis=1, keepdims=True)).sum(axis=1) - 1.0
    col = (P / P.max(axis=0, keepdims=True)).sum(axis=0) - 1.0
    return float((row.sum() + col.sum()) / (2.0 * k * (k - 1)))


def welch_band_power(x, fs, lo, hi):
    """Mean band power via a straightforward Welch estimate."""
    from scipy import signal
    f, p = signal.welch(x, fs=fs, nperseg=min(512, len(x)))
    band = (f >= lo) & (f <= hi)
    return float(p[band].mean()) if band.any() else 0.0
