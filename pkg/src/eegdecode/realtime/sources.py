"""Sample sources for the streaming engine: file replay and an on-demand
synthetic generator whose motor intent can be switched live.

Both produce raw (unfiltered) microvolt chunks [12, k] at 250 Hz and are
chunking-invariant: reading the same source in different chunk sizes
yields the same sample stream.
"""

import time

import numpy as np
from scipy import signal

from ..dsp import MONTAGE_12, TARGET_FS, resample_recording, select_channels
from ..synth import _BLINK_WEIGHT, _BLINK_DEFAULT, _MOTOR_WEIGHT, _MOTOR_DEFAULT, \
    _blink_kernel, resonator_coeffs


class ReplaySource:
    """Replays a recording; paces by wall clock at the recording rate
    unless max_speed is set."""

    def __init__(self, rec, chunk=125, max_speed=False):
        rec = select_channels(rec, MONTAGE_12)
        rec = resample_recording(rec, TARGET_FS)
        self.rec = rec
        self.chunk = int(chunk)
        self.max_speed = max_speed
        self._at = 0

    @property
    def fs(self):
        return self.rec.sample_rate

    def set_intent(self, label):
        """Replayed data is fixed; intent switches are ignored."""

    def read(self, n=None):
        """Next chunk [12, k] or None at end of file."""
        n = self.chunk if n is None else int(n)
        if self._at >= self.rec.n_samples:
            return None
        end = min(self._at + n, self.rec.n_samples)
        out = self.rec.data[:, self._at:end]
        self._at = end
        if not self.max_speed:
            time.sleep(out.shape[1] / self.fs)
        return out

    def rewind(self):
        self._at = 0


class _PinkNoise:
    """Streaming 1/f-ish noise: Paul Kellet's three-pole filter bank,
    one state per channel, unit-ish RMS."""

    def __init__(self, n_channels):
        self.b = np.zeros((3, n_channels))

    def step(self, white):
        """white: [k, n_channels] -> pink [k, n_channels]."""
        out = np.empty_like(white)
        b0, b1, b2 = self.b
        for i in range(white.shape[0]):
            w = white[i]
            b0 = 0.99765 * b0 + w * 0.0990460
            b1 = 0.96300 * b1 + w * 0.2965164
            b2 = 0.57000 * b2 + w * 1.0526913
            out[i] = b0 + b1 + b2 + w * 0.1848
        self.b = np.stack([b0, b1, b2])
        return out * 0.25


class _Resonator:
    """Streaming narrowband rhythm: white noise through a 2-pole
    resonator, one filter state per channel. Matches the offline
    generator's rhythm model (random phase, ~1 Hz bandwidth)."""

    def __init__(self, f0, fs, n_channels):
        self.b, self.a = resonator_coeffs(f0, fs)
        self.zi = np.zeros((n_channels, 2))
        # unit-RMS normalization measured once from the filter's
        # stationary response
        probe = signal.lfilter(self.b, self.a, np.random.default_rng(0).standard_normal(20000))
        self.gain = 1.0 / np.sqrt(np.mean(probe[2000:] ** 2))

    def step(self, white_t_major):
        """white: [k, n_channels] -> rhythm [n_channels, k], unit RMS."""
        x = white_t_major.T
        y, self.zi = signal.lfilter(self.b, self.a, x, axis=-1, zi=self.zi)
        return y * self.gain


class SyntheticLiveSource:
    """EEG generator with a live motor-intent switch.

    Rhythm amplitudes follow the ERD model: during `move` intent the mu
    and beta envelopes ramp down by the configured depths (raised-cosine
    transition), mirroring the offline generator. Blink times are drawn
    up-front for a fixed horizon so the stream is chunking-invariant.
    """

    def __init__(self, seed=0, mu_amp=4.0, mu_erd=0.7, beta_amp=2.0, beta_erd=0.5,
                 noise_rms=2.5, blink_rate=4.0, blink_amp=120.0,
                 horizon_s=3600.0, ramp_s=0.25, max_speed=True):
        self.fs = TARGET_FS
        rng = np.random.default_rng(seed)
        self.mu_rms = mu_amp / np.sqrt(2.0)
        self.beta_rms = beta_amp / np.sqrt(2.0)
        self.mu_erd, self.beta_erd = mu_erd, beta_erd
        self.noise_rms = noise_rms
        self.max_speed = max_speed
        self.ramp_n = max(2, int(round(ramp_s * self.fs)))

        n_ch = len(MONTAGE_12)
        self.motor_w = np.array([_MOTOR_WEIGHT.get(c, _MOTOR_DEFAULT) for c in MONTAGE_12])
        self.blink_w = np.array([_BLINK_WEIGHT.get(c, _BLINK_DEFAULT) for c in MONTAGE_12])
        # one stream per component, each consumed strictly in time order,
        # so reads are chunking-invariant
        self._mu_rng, self._beta_rng, self._noise_rng = (
            np.random.default_rng(s) for s in rng.integers(2**63, size=3))
        self._pink = _PinkNoise(n_ch)
        self._mu = _Resonator(10.0, self.fs, n_ch)
        self._beta = _Resonator(20.0, self.fs, n_ch)

        n_blinks = rng.poisson(blink_rate * horizon_s / 60.0)
        kernel = _blink_kernel(self.fs) * blink_amp
        self._blink_kernel = kernel
        self._blink_starts = np.sort(rng.integers(0, int(horizon_s * self.fs),
                                                  size=n_blinks))
        self._at = 0          # absolute sample index
        self._intent = 0
        self._env = 1.0       # current ERD envelope position [0..1]

    def set_intent(self, label):
        self._intent = int(label)

    def _envelope(self, k):
        """Per-sample envelope fraction (1 = rest level, 0 = full ERD),
        ramping toward the current intent target."""
        target = 0.0 if self._intent == 1 else 1.0
        env = np.empty(k)
        step = 1.0 / self.ramp_n
        e = self._env
        for i in range(k):
            if e < target:
                e = min(target, e + step)
            elif e > target:
                e = max(target, e - step)
            env[i] = e
        self._env = e
        return env

    def read(self, n=125):
        k = int(n)
        frac = self._envelope(k)
        mu_env = (1.0 - self.mu_erd) + self.mu_erd * frac
        beta_env = (1.0 - self.beta_erd) + self.beta_erd * frac

        # t-major draws keep the stream identical across chunk sizes
        mu = self.mu_rms * self.motor_w[:, None] * mu_env * self._mu.step(
            self._mu_rng.standard_normal((k, len(MONTAGE_12))))
        beta = self.beta_rms * self.motor_w[:, None] * beta_env * self._beta.step(
            self._beta_rng.standard_normal((k, len(MONTAGE_12))))
        white = self._noise_rng.standard_normal((k, len(MONTAGE_12)))
        noise = self.noise_rms * self._pink.step(white).T

        blink = np.zeros(k)
        kern = self._blink_kernel
        lo, hi = self._at - len(kern), self._at + k
        starts = self._blink_starts[(self._blink_starts > lo) & (self._blink_starts < hi)]
        for s in starts:
            a = max(s, self._at)
            b = min(s + len(kern), self._at + k)
            blink[a - self._at:b - self._at] += kern[a - s:b - s]

        self._at += k
        if not self.max_speed:
            time.sleep(k / self.fs)
        return mu + beta + noise + self.blink_w[:, None] * blink
