"""Forward pass, joint loss, and analytic gradients for the supervised
convolutional autoencoder.

The encoder compresses a normalized 12x250 window to a 64-d latent; the
decoder reconstructs the window from it, and a small dense head yields
move/rest logits. Training mode uses batch BN statistics and latent
dropout; inference mode is deterministic (running stats, no dropout).
Windows cross the API as [B, channels, time]; internally activations are
time-major (see ops).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import NonFinite
from ..validation import check_window_batch
from . import ops
from .params import CaeParams


def normalize_windows(X, eps=1e-6):
    """Per-window, per-channel z-score. Flat channels stay zero."""
    X = np.asarray(X)
    mean = X.mean(axis=-1, keepdims=True)
    std = X.std(axis=-1, keepdims=True)
    return (X - mean) / np.maximum(std, eps)


@dataclass
class Forward:
    latent: np.ndarray   # [B, 64]
    recon: np.ndarray    # [B, 12, 250]
    logits: np.ndarray   # [B, 2]
    cache: tuple = None
    bn_stats: list = None  # [(mean, var)] per encoder conv, train mode only


def _to_time_major(x):
    return np.ascontiguousarray(x.transpose(0, 2, 1))


def _encoder(params, xt, train, cache_out=None, bn_stats_out=None, tap=None):
    """Encoder chain on time-major input [B, L, C]. `tap(name, tensor) ->
    tensor` is an optional hook at the input and after each pooled stage
    (used by calibration and the reduced-precision forward)."""
    t = params.tensors
    arch = params.arch
    h = xt if tap is None else tap("in", xt)
    for li in range(1, len(arch.conv_filters) + 1):
        c, conv_cache = ops.conv1d_forward(h, t[f"enc{li}.w"], t[f"enc{li}.b"])
        nrm, bn_cache, mean, var = ops.batchnorm_forward(
            c, t[f"enc{li}.bn.gamma"], t[f"enc{li}.bn.beta"],
            t[f"enc{li}.bn.mean"], t[f"enc{li}.bn.var"], train)
        a, relu_coef = ops.leaky_relu_forward(nrm, arch.leaky_slope)
        h, pool_cache = ops.maxpool2_forward(a)
        if cache_out is not None:
            cache_out.append((conv_cache, bn_cache, relu_coef, pool_cache))
        if bn_stats_out is not None:
            bn_stats_out.append((mean, var))
        if tap is not None:
            h = tap(f"stage{li}", h)
    flat = h.reshape(h.shape[0], arch.flat_dim)
    latent, dense_cache = ops.dense_forward(flat, t["latent.w"], t["latent.b"])
    if cache_out is not None:
        cache_out.append((dense_cache, h.shape))
    return latent


def forward(params, batch, mode="infer", rng=None, dropout_p=0.0):
    """Full forward pass. Returns latent, reconstruction, and logits.

    mode="train" requires a batch of >= 2 (batch BN statistics) and uses
    latent dropout when dropout_p > 0 and an rng is supplied.
    """
    train = mode == "train"
    x = check_window_batch(batch, params.arch.input_channels, params.arch.input_len,
                           dtype=next(iter(params.tensors.values())).dtype)
    if train and x.shape[0] < 2:
        raise ValueError("train mode needs a batch of >= 2 windows")
    t = params.tensors
    arch = params.arch
    xt = _to_time_major(x)

    enc_cache, bn_stats = [], []
    latent = _encoder(params, xt, train,
                      cache_out=enc_cache, bn_stats_out=bn_stats if train else None)

    if train and rng is not None and dropout_p > 0:
        z, drop_cache = ops.dropout_forward(latent, dropout_p, rng)
    else:
        z, drop_cache = latent, None

    # decoder
    d0, dd_cache = ops.dense_forward(z, t["dec.dense.w"], t["dec.dense.b"])
    d0a, dd_coef = ops.leaky_relu_forward(d0, arch.leaky_slope)
    h = d0a.reshape(x.shape[0], arch.final_len, arch.conv_filters[-1])
    dec_cache = []
    n_dec = len(arch.conv_filters)
    for li in range(1, n_dec + 1):
        u = ops.upsample2_forward(h)
        c, conv_cache = ops.conv1d_forward(u, t[f"dec{li}.w"], t[f"dec{li}.b"])
        if li < n_dec:
            h, relu_coef = ops.leaky_relu_forward(c, arch.leaky_slope)
        else:
            h, relu_coef = c, None  # final reconstruction conv is linear
        dec_cache.append((conv_cache, relu_coef))
    recon_t = ops.interp_forward(h, arch.input_len)             # [B, 250, 12]
    recon = np.ascontiguousarray(recon_t.transpose(0, 2, 1))    # back to [B, 12, 250]

    # auxiliary head
    a1, a1_cache = ops.dense_forward(z, t["aux1.w"], t["aux1.b"])
    a1r, a1_coef = ops.leaky_relu_forward(a1, arch.leaky_slope)
    logits, a2_cache = ops.dense_forward(a1r, t["aux2.w"], t["aux2.b"])

    for name, arr in (("latent", latent), ("recon", recon), ("logits", logits)):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"{name} overflowed during forward")

    cache = None
    if train:
        cache = (x, enc_cache, drop_cache, dd_cache, dd_coef, dec_cache,
                 a1_cache, a1_coef, a2_cache, h.shape)
    return Forward(latent=latent, recon=recon, logits=logits, cache=cache,
                   bn_stats=bn_stats if train else None)


def encode(params, window):
    """Encoder-only inference: normalized window(s) -> latent [.., 64].

    No decoder or head computation; deterministic (running BN stats)."""
    x = check_window_batch(window, params.arch.input_channels, params.arch.input_len,
                           dtype=next(iter(params.tensors.values())).dtype)
    latent = _encoder(params, _to_time_major(x), train=False)
    if not np.all(np.isfinite(latent)):
        raise NonFinite("latent overflowed during encode")
    return latent[0] if np.asarray(window).ndim == 2 else latent


def loss(recon, target, logits, labels, lam):
    """total = reconstruction MSE + lam * mean cross-entropy."""
    recon_mse, _ = ops.mse(recon, target)
    class_ce, _ = ops.cross_entropy(logits, labels)
    return recon_mse + lam * class_ce, recon_mse, class_ce


def backward(params, fwd, target, labels, lam, weight_decay=0.0):
    """Analytic gradients of loss(+L2) for every trainable tensor."""
    t = params.tensors
    arch = params.arch
    (x, enc_cache, drop_cache, dd_cache, dd_coef, dec_cache,
     a1_cache, a1_coef, a2_cache, dec_out_shape) = fwd.cache
    grads = {}

    recon_mse, drecon = ops.mse(fwd.recon, target)
    class_ce, dlogits = ops.cross_entropy(fwd.logits, labels)
    dlogits = lam * dlogits

    # aux head
    da1r, grads["aux2.w"], grads["aux2.b"] = ops.dense_backward(dlogits, t["aux2.w"], a2_cache)
    da1 = ops.leaky_relu_backward(da1r, a1_coef, arch.leaky_slope)
    dz_aux, grads["aux1.w"], grads["aux1.b"] = ops.dense_backward(da1, t["aux1.w"], a1_cache)

    # decoder (time-major gradients)
    dh = ops.interp_backward(
        np.ascontiguousarray(drecon.astype(fwd.recon.dtype).transpose(0, 2, 1)),
        dec_out_shape[1])
    n_dec = len(arch.conv_filters)
    for li in range(n_dec, 0, -1):
        conv_cache, relu_coef = dec_cache[li - 1]
        if relu_coef is not None:
            dh = ops.leaky_relu_backward(dh, relu_coef, arch.leaky_slope)
        du, grads[f"dec{li}.w"], grads[f"dec{li}.b"] = ops.conv1d_backward(
            dh, t[f"dec{li}.w"], conv_cache)
        dh = ops.upsample2_backward(du)
    dd0a = dh.reshape(x.shape[0], arch.flat_dim)
    dd0 = ops.leaky_relu_backward(dd0a, dd_coef, arch.leaky_slope)
    dz_dec, grads["dec.dense.w"], grads["dec.dense.b"] = ops.dense_backward(
        dd0, t["dec.dense.w"], dd_cache)

    # latent (through dropout) and encoder
    dz = ops.dropout_backward(dz_dec + dz_aux, drop_cache)
    dense_cache, pooled_shape = enc_cache[-1]
    dflat, grads["latent.w"], grads["latent.b"] = ops.dense_backward(
        dz, t["latent.w"], dense_cache)
    dh = dflat.reshape(pooled_shape)
    for li in range(len(arch.conv_filters), 0, -1):
        conv_cache, bn_cache, relu_coef, pool_cache = enc_cache[li - 1]
        da = ops.maxpool2_backward(dh, pool_cache)
        dn = ops.leaky_relu_backward(da, relu_coef, arch.leaky_slope)
        dc, grads[f"enc{li}.bn.gamma"], grads[f"enc{li}.bn.beta"] = ops.batchnorm_backward(
            dn, bn_cache)
        dh, grads[f"enc{li}.w"], grads[f"enc{li}.b"] = ops.conv1d_backward(
            dc, t[f"enc{li}.w"], conv_cache)

    if weight_decay > 0:
        for name in params.weight_names():
            grads[name] = grads[name] + weight_decay * t[name]

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFinite(f"gradient for {name} overflowed")
    return grads, (recon_mse + lam * class_ce, recon_mse, class_ce)


def grad(params, batch, labels, lam=1.0, weight_decay=0.0, dropout_p=0.0,
         rng=None, target=None):
    """Convenience train-mode forward + backward on a normalized batch."""
    fwd = forward(params, batch, mode="train", rng=rng, dropout_p=dropout_p)
    if target is None:
        target = check_window_batch(batch, params.arch.input_channels,
                                    params.arch.input_len,
                                    dtype=fwd.recon.dtype)
    grads, losses = backward(params, fwd, target, labels, lam, weight_decay)
    return grads, losses, fwd.bn_stats
