"""Joint training loop: Adam updates on the combined reconstruction +
classification loss, with augmentation, early stopping on validation
loss, and a best-snapshot return. Deterministic per seed."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import Degenerate
from .network import forward, grad, loss, normalize_windows
from .params import init_params


@dataclass
class TrainConfig:
    lam: float = 1.0              # classification loss weight
    lr: float = 3e-3
    weight_decay: float = 1e-4
    dropout: float = 0.25
    batch_size: int = 64
    max_epochs: int = 200
    patience: int = 10
    noise_scale: float = 0.05     # augmentation noise sigma, x channel std
    channel_dropout: float = 0.1  # augmentation per-channel zeroing prob
    bn_momentum: float = 0.1
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        for p in (self.dropout, self.channel_dropout):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


def augment(window, rng, config):
    """Gaussian noise scaled by per-channel std, plus random channel
    dropout. The input window is left untouched."""
    out = np.array(window, dtype=np.float64, copy=True)
    if config.noise_scale > 0:
        std = out.std(axis=-1, keepdims=True)
        out += rng.standard_normal(out.shape) * (config.noise_scale * std)
    if config.channel_dropout > 0:
        drop = rng.random(out.shape[0]) < config.channel_dropout
        out[drop] = 0.0
    return out


def _augment_batch(batch, rng, config):
    out = np.array(batch, dtype=np.float64, copy=True)
    if config.noise_scale > 0:
        std = out.std(axis=-1, keepdims=True)
        out += rng.standard_normal(out.shape) * (config.noise_scale * std)
    if config.channel_dropout > 0:
        drop = rng.random(out.shape[:2]) < config.channel_dropout
        out[drop] = 0.0
    return out


class Adam:
    """Adaptive-moment gradient descent over a named tensor dict."""

    def __init__(self, names, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.names = sorted(names)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {n: 0.0 for n in self.names}
        self.v = {n: 0.0 for n in self.names}
        self.t = 0

    def step(self, tensors, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for n in self.names:
            g = grads[n]
            self.m[n] = self.beta1 * self.m[n] + (1 - self.beta1) * g
            self.v[n] = self.beta2 * self.v[n] + (1 - self.beta2) * g * g
            update = (self.m[n] / b1c) / (np.sqrt(self.v[n] / b2c) + self.eps)
            tensors[n] = tensors[n] - (self.lr * update).astype(tensors[n].dtype)


@dataclass
class History:
    rows: list = field(default_factory=list)  # per-epoch metric dicts
    best_epoch: int = -1
    stopped_epoch: int = -1

    def val_losses(self):
        return [r["val_total"] for r in self.rows]


def _check_split(y, idx, name):
    classes = np.unique(np.asarray(y)[idx])
    if len(idx) == 0 or len(classes) < 2:
        raise Degenerate(f"{name} split needs both classes, got {classes.tolist()}")


def train_cae(X, y, split, config, arch=None):
    """Train on raw (microvolt) windows; returns (best params, history).

    split is (train_indices, val_indices). Augmented inputs are
    normalized per window; the reconstruction target is the clean
    window under the same normalization (denoising objective)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    train_idx = np.asarray(split[0], dtype=np.int64)
    val_idx = np.asarray(split[1], dtype=np.int64)
    _check_split(y, train_idx, "train")
    _check_split(y, val_idx, "val")

    dtype = np.dtype(config.dtype).type
    rng = np.random.default_rng(config.seed)
    params = init_params(arch, seed=config.seed, dtype=dtype)
    t = params.tensors
    opt = Adam(params.trainable_names(), lr=config.lr)

    Xv = normalize_windows(X[val_idx]).astype(dtype)
    yv = y[val_idx]

    history = History()
    best_val = np.inf
    best_params = params.copy()
    since_best = 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(train_idx)
        tot = np.zeros(3)
        n_batches = 0
        for at in range(0, len(order), config.batch_size):
            ids = order[at:at + config.batch_size]
            if len(ids) < 2:
                continue  # batch statistics need >= 2 windows
            raw = X[ids]
            aug = _augment_batch(raw, rng, config)
            xin = normalize_windows(aug).astype(dtype)
            target = normalize_windows(raw).astype(dtype)
            grads, losses, bn_stats = grad(
                params, xin, y[ids], lam=config.lam,
                weight_decay=config.weight_decay,
                dropout_p=config.dropout, rng=rng, target=target)
            opt.step(t, grads)
            m = config.bn_momentum
            for li, (mean, var) in enumerate(bn_stats, start=1):
                t[f"enc{li}.bn.mean"] = ((1 - m) * t[f"enc{li}.bn.mean"] + m * mean).astype(dtype)
                t[f"enc{li}.bn.var"] = ((1 - m) * t[f"enc{li}.bn.var"] + m * var).astype(dtype)
            tot += losses
            n_batches += 1

        fwd = forward(params, Xv, mode="infer")
        val_total, val_recon, val_ce = loss(fwd.recon, Xv, fwd.logits, yv, config.lam)
        val_acc = float((fwd.logits.argmax(axis=1) == yv).mean())
        history.rows.append({
            "epoch": epoch,
            "train_total": tot[0] / max(n_batches, 1),
            "train_recon": tot[1] / max(n_batches, 1),
            "train_ce": tot[2] / max(n_batches, 1),
            "val_total": val_total,
            "val_recon": val_recon,
            "val_ce": val_ce,
            "val_acc": val_acc,
        })

        if val_total < best_val - 1e-12:
            best_val = val_total
            best_params = params.copy()
            history.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best > config.patience:
                break

    history.stopped_epoch = history.rows[-1]["epoch"]
    return best_params, history
