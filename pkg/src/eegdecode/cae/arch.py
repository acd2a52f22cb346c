"""Architecture descriptor and the derived shape chain.

The encoder is three 1-D convolutions over time (electrodes are the
input feature maps), each batch-normalized, leaky-ReLU activated, and
halved by max-pooling; a dense layer compresses the flattened features
to the latent. The decoder mirrors it with nearest-neighbor upsampling
plus convolutions, ending in a fixed linear interpolation back to the
input length. A small dense head on the latent provides the training-
time class signal.
"""

from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class ArchDescriptor:
    input_channels: int = 12
    input_len: int = 250
    conv_filters: tuple = (32, 64, 128)
    kernel_sizes: tuple = (7, 5, 3)
    pool: int = 2
    leaky_slope: float = 0.01
    latent_dim: int = 64
    aux_hidden: int = 32
    n_classes: int = 2
    # derived, filled in __post_init__
    conv_lens: tuple = field(default=(), compare=False)
    pooled_lens: tuple = field(default=(), compare=False)
    flat_dim: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.conv_filters) != len(self.kernel_sizes):
            raise ValueError("conv_filters and kernel_sizes must align")
        if any(k % 2 == 0 for k in self.kernel_sizes):
            raise ValueError("kernel sizes must be odd (symmetric same-padding)")
        if self.latent_dim < 1 or self.pool < 2:
            raise ValueError("latent_dim >= 1 and pool >= 2 required")
        conv_lens, pooled_lens = [], []
        length = self.input_len
        for _ in self.conv_filters:
            conv_lens.append(length)           # same-padded conv keeps length
            length = length // self.pool
            if length < 1:
                raise ValueError("shape chain collapsed below 1 sample")
            pooled_lens.append(length)
        object.__setattr__(self, "conv_lens", tuple(conv_lens))
        object.__setattr__(self, "pooled_lens", tuple(pooled_lens))
        object.__setattr__(self, "flat_dim", self.conv_filters[-1] * pooled_lens[-1])

    @property
    def final_len(self):
        return self.pooled_lens[-1]

    @property
    def upsampled_len(self):
        return self.final_len * self.pool ** len(self.conv_filters)

    def to_dict(self):
        d = asdict(self)
        for k in ("conv_lens", "pooled_lens", "flat_dim"):
            d.pop(k)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("conv_filters", "kernel_sizes"):
            d[key] = tuple(d[key])
        return cls(**d)


DEFAULT_ARCH = ArchDescriptor()
