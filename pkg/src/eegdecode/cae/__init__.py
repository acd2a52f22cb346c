"""Supervised convolutional autoencoder: parameters, forward/backward,
training, reduced-precision export, and the model file format."""

from .arch import ArchDescriptor, DEFAULT_ARCH
from .estimator import CaeEncoder, stratified_split
from .network import backward, encode, forward, grad, loss, normalize_windows
from .params import CaeParams, init_params
from .quantize import QuantizedParams, forward_quantized, quantize
from .train import Adam, History, TrainConfig, augment, train_cae
from . import modelio

__all__ = [
    "ArchDescriptor", "DEFAULT_ARCH", "CaeEncoder", "stratified_split",
    "backward", "encode", "forward", "grad", "loss", "normalize_windows",
    "CaeParams", "init_params", "QuantizedParams", "forward_quantized",
    "quantize", "Adam", "History", "TrainConfig", "augment", "train_cae",
    "modelio",
]
