"""Parameter container and fan-in-scaled initialization."""

import copy
from dataclasses import dataclass, field

import numpy as np

from .arch import ArchDescriptor


@dataclass
class CaeParams:
    arch: ArchDescriptor
    tensors: dict            # name -> np.ndarray
    seed: int = 0

    def copy(self):
        return CaeParams(arch=self.arch, tensors=copy.deepcopy(self.tensors), seed=self.seed)

    def trainable_names(self):
        return [n for n in self.tensors if not n.endswith((".bn.mean", ".bn.var"))]

    def weight_names(self):
        """Tensors subject to weight decay (weights only, no biases/BN)."""
        return [n for n in self.tensors if n.endswith(".w")]

    def check_finite(self):
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise ValueError(f"non-finite parameter tensor {name}")
        return self


def _uniform(rng, shape, fan_in, dtype):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def init_params(arch=None, seed=0, dtype=np.float32):
    """Deterministic fan-in-scaled uniform init; BN gamma=1, beta=0,
    running stats (0, 1). Tensor creation order is fixed, so a given
    (arch, seed, dtype) always yields bit-identical parameters."""
    if arch is None:
        arch = ArchDescriptor()
    rng = np.random.default_rng(seed)
    t = {}

    in_ch = arch.input_channels
    for li, (out_ch, k) in enumerate(zip(arch.conv_filters, arch.kernel_sizes), start=1):
        t[f"enc{li}.w"] = _uniform(rng, (out_ch, in_ch, k), in_ch * k, dtype)
        t[f"enc{li}.b"] = np.zeros(out_ch, dtype=dtype)
        t[f"enc{li}.bn.gamma"] = np.ones(out_ch, dtype=dtype)
        t[f"enc{li}.bn.beta"] = np.zeros(out_ch, dtype=dtype)
        t[f"enc{li}.bn.mean"] = np.zeros(out_ch, dtype=dtype)
        t[f"enc{li}.bn.var"] = np.ones(out_ch, dtype=dtype)
        in_ch = out_ch

    t["latent.w"] = _uniform(rng, (arch.latent_dim, arch.flat_dim), arch.flat_dim, dtype)
    t["latent.b"] = np.zeros(arch.latent_dim, dtype=dtype)

    t["dec.dense.w"] = _uniform(rng, (arch.flat_dim, arch.latent_dim), arch.latent_dim, dtype)
    t["dec.dense.b"] = np.zeros(arch.flat_dim, dtype=dtype)

    dec_in = arch.conv_filters[-1]
    dec_out_chain = (*arch.conv_filters[-2::-1], arch.input_channels)  # e.g. 64, 32, 12
    dec_kernels = arch.kernel_sizes[::-1]
    for li, (out_ch, k) in enumerate(zip(dec_out_chain, dec_kernels), start=1):
        t[f"dec{li}.w"] = _uniform(rng, (out_ch, dec_in, k), dec_in * k, dtype)
        t[f"dec{li}.b"] = np.zeros(out_ch, dtype=dtype)
        dec_in = out_ch

    t["aux1.w"] = _uniform(rng, (arch.aux_hidden, arch.latent_dim), arch.latent_dim, dtype)
    t["aux1.b"] = np.zeros(arch.aux_hidden, dtype=dtype)
    t["aux2.w"] = _uniform(rng, (arch.n_classes, arch.aux_hidden), arch.aux_hidden, dtype)
    t["aux2.b"] = np.zeros(arch.n_classes, dtype=dtype)

    return CaeParams(arch=arch, tensors=t, seed=seed)
