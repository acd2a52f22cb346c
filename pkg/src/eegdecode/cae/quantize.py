"""Reduced-precision export: symmetric per-tensor INT8 weights with
affine activation ranges from calibration, or an FP16 round trip of
every tensor. The quantized forward is a software emulation (fake
quantization at stage boundaries); no fixed-point kernels are assumed.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import CalibrationTooSmall
from .network import _encoder, _to_time_major, normalize_windows
from .params import CaeParams

def _act_points(arch):
    """Encoder tap points where activations are (re)quantized."""
    return ("in", *(f"stage{i}" for i in range(1, len(arch.conv_filters) + 1)))


@dataclass
class QuantizedParams:
    mode: str                 # "int8" | "fp16"
    arch: object
    tensors: dict             # name -> (data, scale, zero_point); scale None for fp16
    act_ranges: dict = field(default_factory=dict)  # point -> (min, max), int8 only
    n_calibration: int = 0

    def dequantized(self):
        """Float32 CaeParams image of the stored tensors."""
        out = {}
        for name, (data, scale, _zp) in self.tensors.items():
            if data.dtype == np.int8:
                out[name] = data.astype(np.float32) * np.float32(scale)
            else:
                out[name] = data.astype(np.float32)
        return CaeParams(arch=self.arch, tensors=out)


def quantize_tensor_int8(w):
    """Symmetric per-tensor INT8: scale = max|w| / 127."""
    scale = float(np.max(np.abs(w)) / 127.0)
    if scale == 0.0:
        scale = 1.0
    q = np.clip(np.round(w / scale), -127, 127).astype(np.int8)
    return q, scale


def _affine_fake_quant(x, lo, hi):
    """uint8 affine quantize-dequantize with range [lo, hi]."""
    scale = (hi - lo) / 255.0
    if scale <= 0:
        return x
    zp = np.round(-lo / scale)
    q = np.clip(np.round(x / scale + zp), 0, 255)
    return ((q - zp) * scale).astype(x.dtype)


def quantize(params, calibration, mode="int8"):
    """Export reduced-precision parameters.

    calibration: raw microvolt windows [N, 12, 250]; INT8 activation
    ranges are collected over their normalized forms (>= 128 windows
    required). FP16 mode round-trips every tensor and needs none.
    """
    if mode not in ("int8", "fp16"):
        raise ValueError(f"unknown mode {mode!r}")
    tensors = {}
    if mode == "fp16":
        for name, t in params.tensors.items():
            tensors[name] = (t.astype(np.float16), None, None)
        return QuantizedParams(mode="fp16", arch=params.arch, tensors=tensors)

    calibration = np.asarray(calibration, dtype=np.float64)
    if calibration.ndim != 3 or calibration.shape[0] < 128:
        got = 0 if calibration.ndim != 3 else calibration.shape[0]
        raise CalibrationTooSmall(f"int8 calibration needs >= 128 windows, got {got}")

    for name, t in params.tensors.items():
        if name.endswith(".w"):
            q, scale = quantize_tensor_int8(t)
            tensors[name] = (q, scale, 0)
        else:
            tensors[name] = (t.astype(np.float16), None, None)

    ranges = {p: [np.inf, -np.inf] for p in _act_points(params.arch)}

    def record(point, h):
        if point in ranges:
            ranges[point][0] = min(ranges[point][0], float(h.min()))
            ranges[point][1] = max(ranges[point][1], float(h.max()))
        return h

    xn = normalize_windows(calibration).astype(np.float32)
    _encoder(params, _to_time_major(xn), train=False, tap=record)
    return QuantizedParams(mode="int8", arch=params.arch, tensors=tensors,
                           act_ranges={p: tuple(v) for p, v in ranges.items()},
                           n_calibration=calibration.shape[0])


def forward_quantized(qparams, window):
    """Latent vector(s) from the reduced-precision encoder.

    Takes normalized window(s), mirroring encode(). INT8 fake-quantizes
    activations at the calibrated stage boundaries; FP16 round-trips
    them instead.
    """
    fparams = qparams.dequantized()
    single = np.asarray(window).ndim == 2
    x = np.asarray(window, dtype=np.float32)
    if single:
        x = x[None]

    if qparams.mode == "int8":
        def tap(point, h):
            rng = qparams.act_ranges.get(point)
            return h if rng is None else _affine_fake_quant(h, rng[0], rng[1])
    else:
        def tap(point, h):
            return h.astype(np.float16).astype(np.float32)

    latent = _encoder(fparams, _to_time_major(x), train=False, tap=tap)
    return latent[0] if single else latent
