"""Layer primitives (forward + analytic backward).

Activations are carried time-major, [B, L, C], so convolutions reduce to
K shifted GEMMs on strided views with no im2col copies; weights keep the
[C_out, C_in, K] layout of the parameter container. All caches are plain
tuples; nothing here owns state.
"""

import numpy as np

BN_EPS = 1e-5


# --- convolution ---

def conv1d_forward(x, w, b):
    """Same-padded conv over time. x: [B,L,Ci], w: [Co,Ci,K] -> [B,L,Co]."""
    B, L, Ci = x.shape
    Co, _, K = w.shape
    pad = (K - 1) // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    wk = np.ascontiguousarray(w.transpose(2, 1, 0))  # [K, Ci, Co]
    y = np.zeros((B, L, Co), dtype=x.dtype)
    for k in range(K):
        y += xp[:, k:k + L, :] @ wk[k]
    y += b
    return y, (xp, wk, x.shape, w.shape)


def conv1d_backward(dy, w, cache):
    xp, wk, x_shape, w_shape = cache
    B, L, Ci = x_shape
    Co, _, K = w_shape
    pad = (K - 1) // 2
    db = dy.sum(axis=(0, 1))
    dw = np.empty(w_shape, dtype=dy.dtype)
    dxp = np.zeros_like(xp)
    for k in range(K):
        xs = xp[:, k:k + L, :]
        # dw[:, :, k] = sum_b dy[b]^T @ xs[b]
        dw[:, :, k] = np.matmul(dy.transpose(0, 2, 1), xs).sum(axis=0)
        dxp[:, k:k + L, :] += dy @ wk[k].T
    dx = dxp[:, pad:pad + L, :]
    return np.ascontiguousarray(dx), dw, db


# --- pooling / resize ---

def maxpool2_forward(x):
    """Max-pool width 2, stride 2 over time; odd tail sample dropped.
    Ties route to the earlier sample."""
    B, L, C = x.shape
    Lo = L // 2
    v0 = x[:, 0:2 * Lo:2, :]
    v1 = x[:, 1:2 * Lo:2, :]
    second = v1 > v0
    y = np.where(second, v1, v0)
    return y, (second, x.shape)


def maxpool2_backward(dy, cache):
    second, x_shape = cache
    B, L, C = x_shape
    Lo = L // 2
    dx = np.zeros(x_shape, dtype=dy.dtype)
    zero = dy.dtype.type(0)
    dx[:, 0:2 * Lo:2, :] = np.where(second, zero, dy)
    dx[:, 1:2 * Lo:2, :] = np.where(second, dy, zero)
    return dx


def upsample2_forward(x):
    return np.repeat(x, 2, axis=1)


def upsample2_backward(dy):
    return dy[:, 0::2, :] + dy[:, 1::2, :]


_interp_cache = {}


def _interp_matrix(n_in, n_out, dtype):
    key = (n_in, n_out, np.dtype(dtype).str)
    if key not in _interp_cache:
        src = np.arange(n_out) * (n_in - 1) / (n_out - 1)
        i = np.minimum(src.astype(np.int64), n_in - 2)
        frac = src - i
        m = np.zeros((n_out, n_in))
        m[np.arange(n_out), i] = 1.0 - frac
        m[np.arange(n_out), i + 1] += frac
        _interp_cache[key] = m.astype(dtype)
    return _interp_cache[key]


def interp_forward(x, n_out):
    """Linear interpolation along the time axis (fixed linear map)."""
    m = _interp_matrix(x.shape[1], n_out, x.dtype)
    return np.matmul(m, x)


def interp_backward(dy, n_in):
    m = _interp_matrix(n_in, dy.shape[1], dy.dtype)
    return np.matmul(m.T, dy)


# --- normalization / activations ---

def batchnorm_forward(x, gamma, beta, running_mean, running_var, train):
    """Per-feature-map BN over (batch, time). Returns batch stats in
    train mode so the caller can fold them into the running estimates."""
    if train:
        mean = x.mean(axis=(0, 1))
        var = x.var(axis=(0, 1))
    else:
        mean, var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mean) * inv_std
    y = gamma * xhat + beta
    cache = (xhat, inv_std, gamma) if train else None
    return y, cache, mean, var


def batchnorm_backward(dy, cache):
    xhat, inv_std, gamma = cache
    B, L, C = dy.shape
    n = B * L
    dgamma = (dy * xhat).sum(axis=(0, 1))
    dbeta = dy.sum(axis=(0, 1))
    g = gamma * inv_std / n
    dx = g * (n * dy - dbeta - xhat * dgamma)
    return dx, dgamma, dbeta


def leaky_relu_forward(x, slope):
    """Caches the sign mask for the backward."""
    neg = x < 0
    y = np.where(neg, x.dtype.type(slope) * x, x)
    return y, neg


def leaky_relu_backward(dy, neg, slope):
    return np.where(neg, dy.dtype.type(slope) * dy, dy)


def dense_forward(x, w, b):
    """x: [B,din], w: [dout,din] -> [B,dout]."""
    return x @ w.T + b, x


def dense_backward(dy, w, x):
    dw = dy.T @ x
    db = dy.sum(axis=0)
    dx = dy @ w
    return dx, dw, db


def dropout_forward(x, p, rng):
    if p <= 0:
        return x, None
    mask = rng.random(x.shape) >= p
    scale = np.asarray(1.0 / (1.0 - p), dtype=x.dtype)
    return x * mask * scale, (mask, scale)


def dropout_backward(dy, cache):
    if cache is None:
        return dy
    mask, scale = cache
    return dy * mask * scale


# --- losses ---

def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits, labels):
    """Mean CE and its gradient wrt logits (already divided by B)."""
    B = logits.shape[0]
    p = softmax(logits.astype(np.float64))
    picked = np.clip(p[np.arange(B), labels], 1e-300, None)
    ce = float(-np.log(picked).mean())
    dlogits = p.copy()
    dlogits[np.arange(B), labels] -= 1.0
    return ce, (dlogits / B).astype(logits.dtype)


def mse(recon, target):
    """Mean squared error over all elements and its gradient."""
    diff = recon - target
    val = float(np.mean(diff.astype(np.float64) ** 2))
    return val, (2.0 / diff.size) * diff
