"""Synthetic EEG with an event-related desynchronization (ERD) model.

Each channel is 1/f pink noise plus 10 Hz mu and 20 Hz beta rhythms
weighted toward the sensorimotor-adjacent electrodes (FC5/FC6/F3/F4).
The rhythms are narrowband stochastic processes (white noise through a
resonator), not fixed-phase sinusoids, so windows are phase-random the
way real oscillations are. During move intervals the rhythm amplitudes
drop by the configured ERD depth (raised-cosine ramps sit outside the
interval, so the depth holds over the whole labeled stretch).
Frontal-weighted biphasic blink artifacts are injected at the
configured rate, and every subject gets a global amplitude gain drawn
from a log-normal spread. Fully deterministic per seed: subject streams
come from numpy SeedSequence spawning.
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .dataio import add_rest_events
from .dsp import Event, MONTAGE_12, Recording

# Oscillation topography: relative channel weight for mu/beta rhythms.
_MOTOR_WEIGHT = {"FC5": 1.0, "FC6": 1.0, "F3": 0.7, "F4": 0.7}
_MOTOR_DEFAULT = 0.25
# Blink topography: forehead-dominant.
_BLINK_WEIGHT = {"F7": 1.0, "F3": 0.9, "F4": 0.9, "F8": 1.0, "FC5": 0.35, "FC6": 0.35}
_BLINK_DEFAULT = 0.08

_RAMP_S = 0.25


@dataclass
class SynthConfig:
    n_subjects: int = 5
    trials_per_subject: int = 15
    fs: float = 250.0
    move_s: float = 3.0
    rest_s: float = 4.0
    mu_amp: float = 4.0          # microvolts, rest-state 10 Hz amplitude
    mu_erd: float = 0.7          # fractional amplitude drop during move
    beta_amp: float = 2.0        # microvolts, 20 Hz
    beta_erd: float = 0.5
    noise_rms: float = 2.5       # microvolts RMS pink noise per channel
    blink_rate: float = 4.0      # events per minute
    blink_amp: float = 120.0     # microvolts
    subject_spread: float = 0.3  # sigma of the log-normal subject gain
    ers_rebound: float = 0.0     # optional post-move amplitude overshoot
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.mu_erd <= 1.0 and 0.0 <= self.beta_erd <= 1.0):
            raise ValueError("ERD depths must be in [0, 1]")
        if self.move_s <= 1.0 or self.rest_s <= 1.0:
            raise ValueError("move/rest durations must exceed 1 s")
        if self.fs != 250.0:
            raise ValueError("generator is defined at fs = 250 Hz")


def _pink_noise(rng, n):
    """1/f-power noise, unit RMS."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    f = np.fft.rfftfreq(n)
    f[0] = f[1]
    spec /= np.sqrt(f)
    x = np.fft.irfft(spec, n)
    return x / np.sqrt(np.mean(x**2))


# Resonator pole radius: bandwidth ~ (1 - r) * fs / pi ~ 1.2 Hz at 250 Hz.
_RHYTHM_POLE = 0.985


def resonator_coeffs(f0, fs, r=_RHYTHM_POLE):
    """2-pole resonator centered at f0 for narrowband rhythm synthesis."""
    w0 = 2 * np.pi * f0 / fs
    return np.array([1.0]), np.array([1.0, -2 * r * np.cos(w0), r * r])


def _narrowband(rng, n, f0, fs, warmup=500):
    """Unit-RMS random-phase rhythm centered at f0 Hz."""
    b, a = resonator_coeffs(f0, fs)
    white = rng.standard_normal(n + warmup)
    x = signal.lfilter(b, a, white)[warmup:]
    return x / np.sqrt(np.mean(x**2))


def _erd_envelope(n, fs, moves, depth, ers_rebound):
    """Amplitude envelope: 1 at rest, (1 - depth) inside move intervals,
    raised-cosine ramps of _RAMP_S just outside each interval."""
    ramp = max(2, int(round(_RAMP_S * fs)))
    down = 1.0 - depth
    env = np.ones(n)
    half = 0.5 * (1 + np.cos(np.linspace(0, np.pi, ramp)))  # 1 -> 0
    for start, end in moves:
        env[start:end] = down
        r0 = max(0, start - ramp)
        seg = half[ramp - (start - r0):]
        env[r0:start] = down + (1.0 - down) * seg[: start - r0]
        r1 = min(n, end + ramp)
        seg = half[::-1][: r1 - end]
        env[end:r1] = down + (1.0 - down) * seg
        if ers_rebound > 0:
            reb = min(n, r1 + int(round(0.5 * fs)))
            env[r1:reb] *= 1.0 + ers_rebound
    return env


def _blink_kernel(fs):
    """Biphasic deflection ~0.4 s long (spectral energy around 0.5-2 Hz)."""
    n1, n2 = int(0.22 * fs), int(0.18 * fs)
    lobe1 = np.hanning(2 * n1)[:n1 * 2]
    lobe2 = -0.45 * np.hanning(2 * n2)
    return np.concatenate([lobe1, lobe2])


def _generate_subject(cfg, rng):
    fs = cfg.fs
    move_n = int(round(cfg.move_s * fs))
    rest_n = int(round(cfg.rest_s * fs))
    n = rest_n + cfg.trials_per_subject * (move_n + rest_n)

    moves = []
    cursor = rest_n
    for _ in range(cfg.trials_per_subject):
        moves.append((cursor, cursor + move_n))
        cursor += move_n + rest_n

    gain = float(np.exp(rng.normal(0.0, cfg.subject_spread)))
    mu_env = _erd_envelope(n, fs, moves, cfg.mu_erd, cfg.ers_rebound)
    beta_env = _erd_envelope(n, fs, moves, cfg.beta_erd, cfg.ers_rebound)

    blink = np.zeros(n)
    kernel = _blink_kernel(fs) * cfg.blink_amp
    n_blinks = rng.poisson(cfg.blink_rate * (n / fs) / 60.0)
    for _ in range(n_blinks):
        at = rng.integers(0, max(1, n - len(kernel)))
        blink[at:at + len(kernel)] += kernel

    # rhythm RMS matches a sinusoid of the configured amplitude
    mu_rms = cfg.mu_amp / np.sqrt(2.0)
    beta_rms = cfg.beta_amp / np.sqrt(2.0)
    data = np.empty((len(MONTAGE_12), n))
    for ci, name in enumerate(MONTAGE_12):
        w = _MOTOR_WEIGHT.get(name, _MOTOR_DEFAULT)
        mu = mu_rms * w * mu_env * _narrowband(rng, n, 10.0, fs)
        beta = beta_rms * w * beta_env * _narrowband(rng, n, 20.0, fs)
        noise = cfg.noise_rms * _pink_noise(rng, n) if cfg.noise_rms > 0 else 0.0
        data[ci] = gain * (mu + beta + noise + _BLINK_WEIGHT.get(name, _BLINK_DEFAULT) * blink)

    events = [Event(start=s, end=e, label="move") for s, e in moves]
    rec = Recording(channels=MONTAGE_12, sample_rate=fs, data=data, events=events)
    return add_rest_events(rec, guard_s=1.0)


def generate_synthetic(cfg):
    """Generate per-subject recordings; returns [(subject_id, Recording)].

    Subject streams are spawned from the config seed, so each subject is
    individually reproducible and the whole set is bit-deterministic.
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_subjects)
    out = []
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        out.append((f"S{i + 1:02d}", _generate_subject(cfg, rng)))
    return out
