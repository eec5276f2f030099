"""Tiny resolution-agnostic SimSiam network with hand-written backprop.

Encoder: three bias-free 3x3 stride-2 convolutions, each followed by
per-channel batch standardization and ReLU, then global average pooling.
Without the standardization a few large early steps can push every conv1
pre-activation negative, and a dead ReLU layer never recovers.
Projector: two bias-free dense layers, each followed by batch
standardization (per-batch mean/variance, no learned affine); ReLU between
them. Predictor: dense -> ReLU -> dense. Arrays are NHWC.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

KERNEL = 3
STRIDE = 2
PAD = 1
BN_EPS = 1e-5
MIN_RESOLUTION = 8


@dataclass(frozen=True)
class Architecture:
    in_channels: int = 3
    conv_channels: tuple = (8, 16, 32)
    embed_dim: int = 64
    pred_hidden: int = 32

    @property
    def feature_dim(self):
        return self.conv_channels[-1]


class NumericError(FloatingPointError):
    pass


def init_params(arch: Architecture = Architecture(), seed=0, dtype=np.float32):
    """He-initialised parameters, in a fixed insertion order."""
    rng = np.random.default_rng(seed)
    params = {}
    cin = arch.in_channels
    for k, cout in enumerate(arch.conv_channels, 1):
        fan_in = KERNEL * KERNEL * cin
        params[f"conv{k}.w"] = rng.normal(0, np.sqrt(2 / fan_in), (KERNEL, KERNEL, cin, cout))
        cin = cout
    d, e, h = arch.feature_dim, arch.embed_dim, arch.pred_hidden
    params["proj1.w"] = rng.normal(0, np.sqrt(2 / d), (d, e))
    params["proj2.w"] = rng.normal(0, np.sqrt(1 / e), (e, e))
    params["pred1.w"] = rng.normal(0, np.sqrt(2 / e), (e, h))
    params["pred1.b"] = np.zeros(h)
    params["pred2.w"] = rng.normal(0, np.sqrt(1 / h), (h, e))
    params["pred2.b"] = np.zeros(e)
    return {k: v.astype(dtype) for k, v in params.items()}


def conv_out(size):
    return (size + 2 * PAD - KERNEL) // STRIDE + 1


def _conv_names(params):
    return sorted({k.split(".")[0] for k in params if k.startswith("conv")})


def forward_flops(params, resolution) -> int:
    """Per-sample forward FLOPs: 2*k*k*cin*cout*Ho*Wo per conv, 2*fan_in*fan_out per dense."""
    total, size = 0, int(resolution)
    for name in _conv_names(params):
        k, _, cin, cout = params[f"{name}.w"].shape
        size = conv_out(size)
        total += 2 * k * k * cin * cout * size * size
    for name in ("proj1", "proj2", "pred1", "pred2"):
        fan_in, fan_out = params[f"{name}.w"].shape
        total += 2 * fan_in * fan_out
    return total


def encoder_flops(params, resolution) -> int:
    total, size = 0, int(resolution)
    for name in _conv_names(params):
        k, _, cin, cout = params[f"{name}.w"].shape
        size = conv_out(size)
        total += 2 * k * k * cin * cout * size * size
    return total


def _im2col(x, k, s, p):
    n, h, w, c = x.shape
    ho, wo = (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1
    xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
    sn, sh, sw, sc = xp.strides
    # one kernel row (k adjacent pixels x c channels) is contiguous in NHWC
    view = as_strided(xp, (n, ho, wo, k, k * c), (sn, s * sh, s * sw, sh, sc), writeable=False)
    return np.ascontiguousarray(view).reshape(n * ho * wo, k * k * c), (n, ho, wo)


def _col2im(dcols, x_shape, k, s, p, out_hw):
    n, h, w, c = x_shape
    ho, wo = out_hw
    dcols = dcols.reshape(n, ho, wo, k, k * c)
    dxp = np.zeros((n, h + 2 * p, w + 2 * p, c), dtype=dcols.dtype)
    sn, sh, sw, sc = dxp.strides
    # kernel columns [0, s) of neighbouring outputs never overlap, so they can be
    # added as one strided block; the remaining columns go one at a time
    head = min(s, k)
    for ky in range(k):
        block = as_strided(dxp[:, ky:], (n, ho, wo, head * c), (sn, s * sh, s * sw, sc))
        block += dcols[:, :, :, ky, : head * c]
        for kx in range(head, k):
            dxp[:, ky : ky + s * ho : s, kx : kx + s * wo : s, :] += dcols[
                :, :, :, ky, kx * c : (kx + 1) * c
            ]
    return dxp[:, p : p + h, p : p + w, :]


def conv_forward(x, w, b=None):
    k, _, cin, cout = w.shape
    cols, (n, ho, wo) = _im2col(x, k, STRIDE, PAD)
    out = cols @ w.reshape(k * k * cin, cout)
    if b is not None:
        out += b
    return out.reshape(n, ho, wo, cout), cols


def conv_backward(dout, cols, x_shape, w, need_dx=True):
    k, _, cin, cout = w.shape
    n, ho, wo, _ = dout.shape
    d2 = dout.reshape(-1, cout)
    dw = (cols.T @ d2).reshape(w.shape)
    db = _col_sum(d2)
    dx = None
    if need_dx:
        dcols = d2 @ w.reshape(k * k * cin, cout).T
        dx = _col2im(dcols, x_shape, k, STRIDE, PAD, (ho, wo))
    return dx, dw, db


def _col_sum(x):
    # numpy's axis-0 reduction over a tall, narrow array is far slower than this matmul
    return np.ones(x.shape[0], x.dtype) @ x


def batch_standardize(x):
    n = x.shape[0]
    xc = x - _col_sum(x) / n
    inv = 1.0 / np.sqrt(_col_sum(xc * xc) / n + BN_EPS)
    xc *= inv
    return xc, inv


def batch_standardize_backward(dy, y, inv):
    n = dy.shape[0]
    return inv / n * (n * dy - _col_sum(dy) - y * _col_sum(dy * y))


def channel_standardize(h):
    """Per-channel batch standardization of NHWC activations."""
    y, inv = batch_standardize(h.reshape(-1, h.shape[-1]))
    return y.reshape(h.shape), inv


def encode(params, x, stats=None):
    """Backbone features (N, C) after global average pooling, and the statistics used.

    Conv outputs are standardized with ``stats`` (one ``(mean, inv_std)`` per
    conv layer) when given, otherwise with the batch's own statistics. Passing
    the statistics of a reference set embeds queries independently of how
    they are batched.
    """
    h, used = x, []
    for k, name in enumerate(_conv_names(params)):
        a, _ = conv_forward(h, params[f"{name}.w"])
        flat = a.reshape(-1, a.shape[-1])
        if stats is None:
            mu = _col_sum(flat) / len(flat)
            inv = 1.0 / np.sqrt(_col_sum((flat - mu) ** 2) / len(flat) + BN_EPS)
        else:
            mu, inv = stats[k]
        used.append((mu, inv))
        h = np.maximum((flat - mu) * inv, 0).reshape(a.shape)
    return h.mean(axis=(1, 2)), used


def forward(params, x, keep_cache=True):
    """Return ``(z, p, flops, cache)`` for a batch of square NHWC views.

    ``flops`` is the batch total under the per-layer counting rule of
    ``forward_flops``.
    """
    n, hgt, wid = x.shape[:3]
    if hgt != wid or hgt < MIN_RESOLUTION:
        raise ValueError(f"views must be square with side >= {MIN_RESOLUTION}, got {hgt}x{wid}")
    cache = {"layers": [], "acts": []}
    h = x
    for name in _conv_names(params):
        x_shape = h.shape
        a, cols = conv_forward(h, params[f"{name}.w"])
        y, inv = channel_standardize(a)
        h = np.maximum(y, 0)
        if keep_cache:
            cache["layers"].append((name, cols, x_shape, y, inv))
        cache["acts"].append((name, h))
    spatial = h.shape[1] * h.shape[2]
    feat = h.mean(axis=(1, 2))
    a1 = feat @ params["proj1.w"]
    b1, inv1 = batch_standardize(a1)
    r1 = np.maximum(b1, 0)
    a2 = r1 @ params["proj2.w"]
    z, inv2 = batch_standardize(a2)
    q1 = z @ params["pred1.w"] + params["pred1.b"]
    s1 = np.maximum(q1, 0)
    p = s1 @ params["pred2.w"] + params["pred2.b"]
    cache["acts"] += [("proj1", b1), ("proj2", z), ("pred1", s1), ("pred2", p)]
    if not (np.isfinite(z).all() and np.isfinite(p).all()):
        for name, act in cache["acts"]:
            if not np.isfinite(act).all():
                raise NumericError(f"non-finite activations in layer {name}")
    if keep_cache:
        cache.update(
            spatial=spatial, feat=feat, b1=b1, inv1=inv1, r1=r1, z=z, inv2=inv2,
            s1=s1, last_shape=h.shape,
        )
    else:
        cache = None
    flops = n * forward_flops(params, hgt)
    return z, p, flops, cache


def backward(params, cache, dp, dz=None):
    """Gradients of all parameters given upstream ``dp`` (and optional ``dz``)."""
    g = {}
    s1 = cache["s1"]
    g["pred2.w"] = s1.T @ dp
    g["pred2.b"] = dp.sum(axis=0)
    ds1 = dp @ params["pred2.w"].T
    ds1 *= s1 > 0
    g["pred1.w"] = cache["z"].T @ ds1
    g["pred1.b"] = ds1.sum(axis=0)
    dzz = ds1 @ params["pred1.w"].T
    if dz is not None:
        dzz = dzz + dz
    da2 = batch_standardize_backward(dzz, cache["z"], cache["inv2"])
    g["proj2.w"] = cache["r1"].T @ da2
    dr1 = da2 @ params["proj2.w"].T
    db1 = dr1 * (cache["b1"] > 0)
    da1 = batch_standardize_backward(db1, cache["b1"], cache["inv1"])
    g["proj1.w"] = cache["feat"].T @ da1
    dfeat = da1 @ params["proj1.w"].T
    n, ho, wo, c = cache["last_shape"]
    dh = np.broadcast_to((dfeat / cache["spatial"])[:, None, None, :], (n, ho, wo, c))
    layers = cache["layers"]
    for idx in range(len(layers) - 1, -1, -1):
        name, cols, x_shape, y, inv = layers[idx]
        dy = (dh * (y > 0)).reshape(-1, y.shape[-1])
        da = batch_standardize_backward(dy, y.reshape(dy.shape), inv).reshape(y.shape)
        dh, g[f"{name}.w"], _ = conv_backward(da, cols, x_shape, params[f"{name}.w"], need_dx=idx > 0)
    return {k: g[k] for k in params}


def architecture_of(params) -> Architecture:
    """Recover the ``Architecture`` from parameter shapes (e.g. a loaded checkpoint)."""
    convs = _conv_names(params)
    return Architecture(
        in_channels=params[f"{convs[0]}.w"].shape[2],
        conv_channels=tuple(params[f"{c}.w"].shape[3] for c in convs),
        embed_dim=params["proj1.w"].shape[1],
        pred_hidden=params["pred1.w"].shape[1],
    )
