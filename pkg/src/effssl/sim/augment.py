"""SimCLR-style augmentation whose photometric strength scales with a magnitude.

Magnitude 5 is the standard strength; colour jitter (brightness, contrast,
saturation, per-channel gain), grayscale probability
and pixel noise all scale linearly with ``magnitude / 5``. Geometric ops
(random resized crop, flip) do not depend on the magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..imaging import crop_resize

STANDARD_MAGNITUDE = 5.0


@dataclass(frozen=True)
class AugmentationPolicy:
    magnitude: float = STANDARD_MAGNITUDE
    crop_scale: tuple = (0.3, 1.0)
    crop_ratio: tuple = (3 / 4, 4 / 3)
    flip_probability: float = 0.5
    brightness: float = 0.4
    contrast: float = 0.4
    saturation: float = 0.4
    channel_gain: float = 0.4  # per-channel gain, a linear stand-in for hue jitter
    jitter_probability: float = 0.8
    grayscale_probability: float = 0.2
    noise_std: float = 0.03

    def at(self, magnitude):
        return replace(self, magnitude=magnitude)

    @property
    def scale(self):
        return self.magnitude / STANDARD_MAGNITUDE


def _sample_boxes(n, size, policy, rng):
    area = rng.uniform(*policy.crop_scale, n) * size * size
    log_r = rng.uniform(math.log(policy.crop_ratio[0]), math.log(policy.crop_ratio[1]), n)
    ratio = np.exp(log_r)
    w = np.minimum(np.sqrt(area * ratio), size)
    h = np.minimum(np.sqrt(area / ratio), size)
    top = rng.uniform(0, 1, n) * (size - h)
    left = rng.uniform(0, 1, n) * (size - w)
    return np.stack([top, left, h, w], axis=1)


LUMA = np.array([0.299, 0.587, 0.114])


def colour_transform(bright, contr, sat, gain, gray, mean_luma):
    """Per-sample affine colour map ``x -> x @ M.T + o`` for the jitter chain.

    Channel gains apply first, brightness scales, contrast pulls toward the
    (brightened) mean luma, saturation blends with the per-pixel luma,
    grayscale replaces with luma. ``mean_luma`` is measured after the gains.
    """
    n = bright.shape[0]
    eye = np.broadcast_to(np.eye(3), (n, 3, 3))
    to_luma = np.broadcast_to(np.outer(np.ones(3), LUMA), (n, 3, 3))
    b, c, s = (v[:, None, None] for v in (bright, contr, sat))
    # brightness then contrast: c*b*g*x + (1-c)*mu, mu = b*mean_luma
    m = c * b * (eye * gain[:, None, :])
    o = (1 - c[:, 0, 0]) * bright * mean_luma
    # saturation: s*x + (1-s)*luma(x); luma(o_vec) = o since o is grey
    m = s * m + (1 - s) * (to_luma @ m)
    m = np.where(gray[:, None, None], to_luma @ m, m)
    return m, np.repeat(o[:, None], 3, axis=1)


def augment_batch(images, policy: AugmentationPolicy, resolution, rng) -> np.ndarray:
    """One random view per image. Draws from ``rng`` in a fixed order."""
    n, size = images.shape[0], images.shape[1]
    if resolution > size:
        raise ValueError(f"resolution {resolution} exceeds source size {size}")
    boxes = _sample_boxes(n, size, policy, rng)
    flip = rng.uniform(0, 1, n) < policy.flip_probability
    s = policy.scale
    jitter = rng.uniform(0, 1, n) < policy.jitter_probability
    bright = 1 + s * policy.brightness * rng.uniform(-1, 1, n)
    contr = 1 + s * policy.contrast * rng.uniform(-1, 1, n)
    sat = 1 + s * policy.saturation * rng.uniform(-1, 1, n)
    gain = 1 + s * policy.channel_gain * rng.uniform(-1, 1, (n, 3))
    gray = rng.uniform(0, 1, n) < min(1.0, s * policy.grayscale_probability)
    # uniform noise with the configured standard deviation; cheaper than Gaussian draws
    noise = rng.random((n, resolution, resolution, 3), dtype=np.float32)

    x = crop_resize(images, boxes, resolution)
    x[flip] = x[flip, :, ::-1]
    if s > 0:
        bright, contr, sat = (np.where(jitter, v, 1.0) for v in (bright, contr, sat))
        gain = np.where(jitter[:, None], gain, 1.0)
        flat = x.reshape(n, -1, 3)
        # a matmul against ones is far faster than mean() over the middle axis
        chan_mean = (np.ones(flat.shape[1], x.dtype) @ flat).astype(np.float64) / flat.shape[1]
        mean_luma = (chan_mean * gain) @ LUMA
        m, o = colour_transform(bright, contr, sat, gain, gray, mean_luma)
        half_width = np.sqrt(3.0) * s * policy.noise_std
        noise *= 2 * half_width
        noise += (o - half_width)[:, None, None, :].astype(x.dtype)
        x = np.matmul(flat, m.transpose(0, 2, 1).astype(x.dtype)).reshape(noise.shape)
        x += noise
        np.clip(x, 0.0, 1.0, out=x)
    return x


def augment(image, policy: AugmentationPolicy, resolution, rng) -> np.ndarray:
    """Single-image form of ``augment_batch``."""
    return augment_batch(image[None], policy, resolution, rng)[0]
