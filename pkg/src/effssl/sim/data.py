"""Seeded synthetic image dataset.

Each class is a smooth random colour texture on a square canvas. A sample is
a random window of its class texture with a random per-channel colour cast
and pixel noise; the colour cast is a nuisance that colour-jitter invariance
removes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter


@dataclass(frozen=True)
class SynthDatasetConfig:
    num_classes: int = 8
    samples_per_class: int = 250
    canvas_size: int = 48
    image_size: int = 32
    noise_std: float = 0.05
    seed: int = 0
    smoothing: float = 3.0
    color_cast: float = 0.3  # per-sample channel gain/offset nuisance
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.num_classes < 1 or self.samples_per_class < 2:
            raise ValueError("need num_classes >= 1 and samples_per_class >= 2")
        if not 8 <= self.image_size <= self.canvas_size:
            raise ValueError(
                f"need 8 <= image_size <= canvas_size, got {self.image_size}, {self.canvas_size}"
            )
        if self.noise_std < 0 or self.color_cast < 0:
            raise ValueError("noise_std and color_cast must be >= 0")


@dataclass
class Dataset:
    train_x: np.ndarray
    train_y: np.ndarray
    eval_x: np.ndarray
    eval_y: np.ndarray
    prototypes: np.ndarray


def make_prototypes(cfg: SynthDatasetConfig, rng):
    c = cfg.canvas_size
    raw = rng.standard_normal((cfg.num_classes, c, c, 3))
    protos = gaussian_filter(raw, sigma=(0, cfg.smoothing, cfg.smoothing, 0), mode="wrap")
    protos -= protos.mean(axis=(1, 2, 3), keepdims=True)
    protos /= protos.std(axis=(1, 2, 3), keepdims=True)
    return np.clip(0.5 + 0.2 * protos, 0.0, 1.0)


def generate_dataset(cfg: SynthDatasetConfig = SynthDatasetConfig()) -> Dataset:
    rng = np.random.default_rng(cfg.seed)
    protos = make_prototypes(cfg, rng)
    s, c = cfg.image_size, cfg.canvas_size
    n_train = int(round(cfg.train_fraction * cfg.samples_per_class))
    tx, ty, ex, ey = [], [], [], []
    for label in range(cfg.num_classes):
        tops = rng.integers(0, c - s + 1, cfg.samples_per_class)
        lefts = rng.integers(0, c - s + 1, cfg.samples_per_class)
        imgs = np.stack([protos[label, t : t + s, l : l + s] for t, l in zip(tops, lefts)])
        n = cfg.samples_per_class
        gain = 1 + cfg.color_cast * rng.uniform(-1, 1, (n, 1, 1, 3))
        offset = 0.3 * cfg.color_cast * rng.uniform(-1, 1, (n, 1, 1, 3))
        imgs = (imgs - 0.5) * gain + 0.5 + offset
        imgs = imgs + cfg.noise_std * rng.standard_normal(imgs.shape)
        imgs = np.clip(imgs, 0.0, 1.0).astype(np.float32)
        tx.append(imgs[:n_train])
        ex.append(imgs[n_train:])
        ty.append(np.full(n_train, label))
        ey.append(np.full(cfg.samples_per_class - n_train, label))
    return Dataset(
        np.concatenate(tx), np.concatenate(ty), np.concatenate(ex), np.concatenate(ey),
        protos.astype(np.float32),
    )
