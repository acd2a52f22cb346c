"""Gated streaming decoder: bounded buffer in, decisions out.

Samples are causally filtered on ingestion; whenever a stride boundary
completes a full 12x250 window the engine gates it (amplitude artifact,
then classifier confidence) and emits one GatedDecision. Feeding a
whole recording in arbitrary chunk sizes yields bit-identical decisions
to the offline path (same causal filter from zero state, same stride).
"""

import time

import numpy as np

from ..dsp import CausalFilter, MONTAGE_12, TARGET_FS, WINDOW_SAMPLES, design_bandpass, \
    epoch_stream
from ..cae import normalize_windows
from .state import ACCEPTED, ARTIFACT, LOW_CONFIDENCE, GatedDecision

FLAT_VARIANCE_UV2 = 1e-3


def is_artifact(window, amp_limit_uv):
    """True when any channel's peak-to-peak exceeds amp_limit_uv or is
    flat (variance below 1e-3 uV^2)."""
    ptp = window.max(axis=-1) - window.min(axis=-1)
    return bool(np.any(ptp > amp_limit_uv)
                or np.any(window.var(axis=-1) < FLAT_VARIANCE_UV2))


def gate_window(window, margin, theta, amp_limit_uv):
    """Gate verdict for one filtered window and classifier margin; the
    artifact verdict overrides the confidence gate."""
    if is_artifact(window, amp_limit_uv):
        return ARTIFACT
    if abs(margin) < theta:
        return LOW_CONFIDENCE
    return ACCEPTED


class StreamingDecoder:
    """Causal filter + ring buffer + encoder + boosted classifier.

    push_samples() is the single consumer-side entry point; the internal
    filter state makes instances single-threaded by design.
    """

    def __init__(self, bundle, stride=125, theta=0.6, amp_limit_uv=100.0,
                 band=(8.0, 40.0), filter_order=4, fs=TARGET_FS,
                 capacity_s=10.0, n_channels=len(MONTAGE_12)):
        self.bundle = bundle
        self.stride = int(stride)
        self.theta = float(theta)
        self.amp_limit_uv = float(amp_limit_uv)
        self.fs = float(fs)
        self.window = WINDOW_SAMPLES
        self.coeffs = design_bandpass(band[0], band[1], filter_order, fs)
        self.filter = CausalFilter(self.coeffs, n_channels)
        self.capacity = max(int(capacity_s * fs), self.window)
        self.n_channels = n_channels

        self._tail = np.zeros((n_channels, 0))
        self._total_in = 0            # absolute samples ingested (incl. dropped)
        self._next_end = self.window  # absolute index where the next window ends
        self.dropped_samples = 0
        self.skipped_decisions = 0
        self.latency_trace_ms = []
        self.cpu_trace_s = []

    def decide_window(self, window_uv):
        """Gate + classify one already-filtered window; shared verbatim
        with the offline comparator. Artifact windows skip the encoder
        and carry no classifier output (label 0, margin 0)."""
        if is_artifact(window_uv, self.amp_limit_uv):
            return 0, 0.0, ARTIFACT
        xn = normalize_windows(window_uv).astype(np.float32)
        latent = self.bundle.latents_normalized(xn)
        label, margin = self.bundle.classifier.predict_one(latent)
        verdict = ACCEPTED if abs(margin) >= self.theta else LOW_CONFIDENCE
        return label, margin, verdict

    def push_samples(self, chunk):
        """Ingest a [12, k] microvolt chunk; returns new GatedDecisions."""
        chunk = np.asarray(chunk, dtype=np.float64)
        if chunk.ndim != 2 or chunk.shape[0] != self.n_channels:
            raise ValueError(f"chunk must be [{self.n_channels}, k], got {chunk.shape}")
        arrival = time.perf_counter()
        filtered = self.filter.process(chunk)
        self._total_in += chunk.shape[1]
        self._tail = np.concatenate([self._tail, filtered], axis=1)
        if self._tail.shape[1] > self.capacity:
            overflow = self._tail.shape[1] - self.capacity
            self._tail = self._tail[:, overflow:]
            self.dropped_samples += overflow

        decisions = []
        tail_start = self._total_in - self._tail.shape[1]
        while self._next_end <= self._total_in:
            begin = self._next_end - self.window
            if begin < tail_start:  # window partially dropped by an overrun
                self.skipped_decisions += 1
                self._next_end += self.stride
                continue
            cpu0 = time.process_time()
            win = self._tail[:, begin - tail_start:self._next_end - tail_start]
            label, margin, verdict = self.decide_window(win)
            decisions.append(GatedDecision(
                raw_label=label, margin=margin, gate=verdict,
                window_start=begin, window_end=self._next_end))
            emitted = time.perf_counter()
            self.latency_trace_ms.append((emitted - arrival) * 1000.0)
            self.cpu_trace_s.append(time.process_time() - cpu0)
            self._next_end += self.stride
        return decisions

    def reset(self):
        self.filter.reset()
        self._tail = np.zeros((self.n_channels, 0))
        self._total_in = 0
        self._next_end = self.window
        self.dropped_samples = 0
        self.skipped_decisions = 0
        self.latency_trace_ms = []
        self.cpu_trace_s = []


def offline_decisions(rec, bundle, stride=125, theta=0.6, amp_limit_uv=100.0,
                      band=(8.0, 40.0), filter_order=4):
    """Whole-file reference path: causal-filter the full recording from
    zero state, window it with epoch_stream, and run the same per-window
    decision. Streaming the same file must match this bit-for-bit."""
    engine = StreamingDecoder(bundle, stride=stride, theta=theta,
                              amp_limit_uv=amp_limit_uv, band=band,
                              filter_order=filter_order, fs=rec.sample_rate,
                              n_channels=rec.data.shape[0])
    filtered = CausalFilter(engine.coeffs, rec.data.shape[0]).process(rec.data)
    filtered_rec = type(rec)(channels=rec.channels, sample_rate=rec.sample_rate,
                             data=filtered, events=[])
    out = []
    for win in epoch_stream(filtered_rec, stride=stride, labeling="unlabeled"):
        label, margin, verdict = engine.decide_window(win.samples)
        out.append(GatedDecision(raw_label=label, margin=margin, gate=verdict,
                                 window_start=win.source[1],
                                 window_end=win.source[1] + WINDOW_SAMPLES))
    return out
