"""Batched image resampling on NHWC arrays."""
from __future__ import annotations

import numpy as np


def _interp_matrix(coords, size, dtype):
    # (N, R, size) linear-interpolation weights for per-sample sample coords (N, R)
    c = np.clip(coords, 0.0, size - 1)
    lo = np.floor(c).astype(np.intp)
    hi = np.minimum(lo + 1, size - 1)
    frac = (c - lo).astype(dtype)
    out = np.zeros(coords.shape + (size,), dtype=dtype)
    np.put_along_axis(out, hi[..., None], frac[..., None], axis=-1)
    # lo == hi only at the clamped edge, where frac is 0
    np.put_along_axis(out, lo[..., None], (1 - frac)[..., None], axis=-1)
    return out


def crop_resize(images, boxes, size):
    """Bilinear sampling of crop ``boxes`` (N, 4: top, left, height, width) to ``size``.

    Sample centres follow the half-pixel convention, so a full-image box at the
    source size is an exact copy.
    """
    n, h, w, c = images.shape
    boxes = np.asarray(boxes, dtype=np.float64)
    grid = (np.arange(size) + 0.5) / size
    ay = _interp_matrix(boxes[:, :1] + grid * boxes[:, 2:3] - 0.5, h, images.dtype)
    ax = _interp_matrix(boxes[:, 1:2] + grid * boxes[:, 3:4] - 0.5, w, images.dtype)
    rows = (ay @ images.reshape(n, h, w * c)).reshape(n, size, w, c)
    # ax broadcasts over output rows: out[n, s, t] = ax[n, t] @ rows[n, s]
    return ax[:, None] @ rows


def bilinear_resize(images, size):
    n, h, w = images.shape[:3]
    boxes = np.tile([0.0, 0.0, h, w], (n, 1))
    return crop_resize(images, boxes, size)


def box_downsample(images, factor):
    n, h, w, c = images.shape
    if h % factor or w % factor:
        raise ValueError(f"{h}x{w} is not divisible by {factor}")
    return images.reshape(n, h // factor, factor, w // factor, factor, c).mean(axis=(2, 4))


def downsample(images, size):
    """Area averaging for integer ratios, bilinear otherwise."""
    h = images.shape[1]
    if h == size:
        return images
    if h % size == 0 and images.shape[2] == h:
        return box_downsample(images, h // size)
    return bilinear_resize(images, size)
