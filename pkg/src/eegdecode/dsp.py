"""Deterministic signal conditioning: band-pass filtering, rational
resampling, channel selection, and windowing into fixed 12x250 epochs.

Conventions: recordings are [n_channels, n_samples] in microvolts; all
filtering runs along the last axis. The offline path uses zero-phase
filtering; the streaming path uses the causal form with explicit state
(see CausalFilter) so chunked and whole-signal runs agree bit-for-bit.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np
from scipy import signal

from .errors import InvalidBand, IrrationalRatio, MissingChannel, TooShort, UnstableDesign

# 12 scalp electrodes shared between the training montage and the consumer
# headset layout, in canonical row order.
MONTAGE_12 = ("F7", "F3", "FC5", "T7", "P7", "O1", "O2", "P8", "T8", "FC6", "F4", "F8")
FRONTAL_CHANNELS = ("F7", "F3", "F4", "F8")
FRONTAL_INDEX = tuple(MONTAGE_12.index(c) for c in FRONTAL_CHANNELS)

REST, MOVE = 0, 1
LABEL_NAMES = {"rest": REST, "move": MOVE}
WINDOW_SAMPLES = 250
TARGET_FS = 250.0

# Kaiser beta for ~60 dB stop-band attenuation: 0.1102 * (60 - 8.7)
_KAISER_BETA_60DB = 5.65326

# Margin inside the unit circle required of every designed filter pole.
_POLE_MARGIN = 1e-9


@dataclass(frozen=True)
class Event:
    """A labeled sample interval [start, end) within a recording."""
    start: int
    end: int
    label: str  # "rest" | "move"


@dataclass
class Recording:
    """Multi-channel EEG time series with labeled event intervals."""
    channels: tuple
    sample_rate: float
    data: np.ndarray        # [n_channels, n_samples], microvolts
    events: list = field(default_factory=list)

    def __post_init__(self):
        self.channels = tuple(self.channels)
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[0] != len(self.channels):
            raise ValueError(
                f"data must be [n_channels={len(self.channels)} x n_samples], got {self.data.shape}"
            )
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("channel names must be unique")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("recording data contains NaN/Inf")
        n = self.data.shape[1]
        for ev in self.events:
            if not (0 <= ev.start < ev.end <= n):
                raise ValueError(f"event {ev} outside [0, {n})")
            if ev.label not in LABEL_NAMES:
                raise ValueError(f"unknown event label {ev.label!r}")

    @property
    def n_samples(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class FilterCoeffs:
    """Digital IIR transfer function b(z)/a(z) with its design parameters."""
    b: np.ndarray
    a: np.ndarray
    design: tuple  # (low_hz, high_hz, order, fs)

    def poles(self):
        return np.roots(self.a)


@dataclass
class EpochWindow:
    """One fixed-size analysis window [12 x 250] with an optional label."""
    samples: np.ndarray
    label: int | None = None           # REST=0 | MOVE=1 | None
    source: tuple = ("", 0)            # (recording id, start_sample)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.shape != (12, WINDOW_SAMPLES):
            raise ValueError(f"window must be 12x{WINDOW_SAMPLES}, got {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("window contains NaN/Inf")


def design_bandpass(low_hz, high_hz, order=4, fs=TARGET_FS):
    """Design a Butterworth band-pass via the bilinear transform.

    `order` is the low-pass prototype order (the band-pass has 2*order
    poles), even and in [2, 8]. Raises InvalidBand on bad edges and
    UnstableDesign should any pole land on/outside the unit circle.
    """
    if not (0 < low_hz < high_hz < fs / 2):
        raise InvalidBand(f"need 0 < low < high < fs/2, got ({low_hz}, {high_hz}) at fs={fs}")
    if order < 2 or order > 8 or order % 2 != 0:
        raise InvalidBand(f"order must be even and in [2, 8], got {order}")
    nyq = fs / 2.0
    b, a = signal.butter(order, [low_hz / nyq, high_hz / nyq], btype="bandpass")
    coeffs = FilterCoeffs(b=b, a=a, design=(float(low_hz), float(high_hz), int(order), float(fs)))
    pole_mag = np.abs(coeffs.poles())
    if np.any(pole_mag >= 1.0 - _POLE_MARGIN):
        raise UnstableDesign(f"max pole magnitude {pole_mag.max():.12f}")
    return coeffs


def frequency_response(coeffs, freqs_hz):
    """Complex response H(e^{j w}) of the filter at the given frequencies."""
    fs = coeffs.design[3]
    w = 2 * np.pi * np.asarray(freqs_hz, dtype=np.float64) / fs
    _, h = signal.freqz(coeffs.b, coeffs.a, worN=w)
    return h


def apply_filter(coeffs, x, mode="causal"):
    """Filter a series along its last axis.

    causal: direct-form recursion from zero state; same-length output,
    usable sample by sample online (see CausalFilter for chunked state).
    zero_phase: forward-backward pass, zero group delay, offline only;
    raises TooShort when the signal cannot support the edge padding.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == "causal":
        return signal.lfilter(coeffs.b, coeffs.a, x, axis=-1)
    if mode == "zero_phase":
        min_len = 3 * max(len(coeffs.b), len(coeffs.a))
        if x.shape[-1] <= min_len:
            raise TooShort(f"zero_phase needs length > {min_len}, got {x.shape[-1]}")
        return signal.filtfilt(coeffs.b, coeffs.a, x, axis=-1)
    raise ValueError(f"unknown mode {mode!r}")


class CausalFilter:
    """Causal IIR filter with explicit per-channel state for streaming.

    Feeding the full signal in one call or in arbitrary chunks produces
    bit-identical output. State objects belong to one logical thread.
    """

    def __init__(self, coeffs, n_channels):
        self.coeffs = coeffs
        order = max(len(coeffs.b), len(coeffs.a)) - 1
        self._zi = np.zeros((n_channels, order))

    def process(self, chunk):
        """Filter a [n_channels, k] chunk, advancing the internal state."""
        chunk = np.asarray(chunk, dtype=np.float64)
        out, self._zi = signal.lfilter(
            self.coeffs.b, self.coeffs.a, chunk, axis=-1, zi=self._zi
        )
        return out

    def reset(self):
        self._zi[:] = 0.0


def _rational_ratio(from_hz, to_hz, max_denominator=1000):
    ratio = to_hz / from_hz
    frac = Fraction(ratio).limit_denominator(max_denominator)
    if frac.numerator <= 0 or not math.isclose(float(frac), ratio, rel_tol=1e-9, abs_tol=0):
        raise IrrationalRatio(
            f"{from_hz} -> {to_hz} Hz is not a small-integer rational (denominator <= {max_denominator})"
        )
    return frac.numerator, frac.denominator


def resample(x, from_hz, to_hz):
    """Rational-rate polyphase resampling along the last axis.

    Anti-alias FIR (Kaiser, ~60 dB) is applied inside the polyphase
    stage; output length is floor(n * to_hz / from_hz). Tones below
    0.4 * min(from_hz, to_hz) survive within 5% amplitude.
    """
    if from_hz <= 0 or to_hz <= 0:
        raise ValueError("rates must be positive")
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    out_len = int(math.floor(n * to_hz / from_hz))
    up, down = _rational_ratio(from_hz, to_hz)
    if up == down:
        return x.copy()
    y = signal.resample_poly(x, up, down, axis=-1, window=("kaiser", _KAISER_BETA_60DB))
    if y.shape[-1] < out_len:  # defensive: resample_poly yields ceil(n*up/down)
        pad = [(0, 0)] * (y.ndim - 1) + [(0, out_len - y.shape[-1])]
        y = np.pad(y, pad)
    return y[..., :out_len]


def resample_recording(rec, to_hz):
    """Resample a recording, rescaling its event sample indices."""
    if math.isclose(rec.sample_rate, to_hz):
        return rec
    data = resample(rec.data, rec.sample_rate, to_hz)
    scale = to_hz / rec.sample_rate
    n = data.shape[1]
    events = [
        Event(
            start=min(int(round(ev.start * scale)), n),
            end=min(int(round(ev.end * scale)), n),
            label=ev.label,
        )
        for ev in rec.events
    ]
    events = [ev for ev in events if ev.start < ev.end]
    return Recording(channels=rec.channels, sample_rate=float(to_hz), data=data, events=events)


def select_channels(rec, wanted):
    """Subset/reorder recording rows to match `wanted` exactly."""
    index = {name: i for i, name in enumerate(rec.channels)}
    rows = []
    for name in wanted:
        if name not in index:
            raise MissingChannel(name)
        rows.append(index[name])
    return Recording(
        channels=tuple(wanted),
        sample_rate=rec.sample_rate,
        data=rec.data[rows].copy(),
        events=list(rec.events),
    )


def epoch_count(n_samples, window_len, stride):
    """Number of full windows: floor((n - window) / stride) + 1, or 0."""
    if n_samples < window_len:
        return 0
    return (n_samples - window_len) // stride + 1


def epoch_stream(rec, window_len=WINDOW_SAMPLES, stride=125, labeling="event_majority",
                 rec_id=""):
    """Slice a recording into fixed windows starting at 0, stride, 2*stride...

    The last partial window is dropped. With event_majority labeling,
    a window is `move` when move events cover strictly more than half of
    it, `rest` when non-move samples do, and unlabeled on an exact tie.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = rec.n_samples
    move_mask = None
    if labeling == "event_majority":
        move_mask = np.zeros(n, dtype=bool)
        for ev in rec.events:
            if ev.label == "move":
                move_mask[ev.start:ev.end] = True
    elif labeling != "unlabeled":
        raise ValueError(f"unknown labeling {labeling!r}")

    windows = []
    for start in range(0, n - window_len + 1, stride):
        label = None
        if move_mask is not None:
            move_cov = int(move_mask[start:start + window_len].sum())
            rest_cov = window_len - move_cov
            if move_cov * 2 > window_len:
                label = MOVE
            elif rest_cov * 2 > window_len:
                label = REST
        windows.append(EpochWindow(
            samples=rec.data[:, start:start + window_len],
            label=label,
            source=(rec_id, start),
        ))
    return windows
