"""Real-time EEG motor-intent decoding engine.

Offline: signal conditioning (band-pass, rational resampling, ICA
artifact removal), supervised convolutional-autoencoder feature
learning, and boosted-stump classification with a LOSO evaluation
harness. Online: a gated streaming decoder with a debounced hand state
machine, an ASCII actuator protocol, and a WebSocket session service.
"""

__version__ = "0.1.0"

from . import boost, baselines, cae, dataio, dsp, evaluate, errors, ica, synth
from .dsp import MONTAGE_12, Recording, EpochWindow, design_bandpass, epoch_stream

__all__ = [
    "boost", "baselines", "cae", "dataio", "dsp", "evaluate", "errors",
    "ica", "synth", "MONTAGE_12", "Recording", "EpochWindow",
    "design_bandpass", "epoch_stream", "__version__",
]
