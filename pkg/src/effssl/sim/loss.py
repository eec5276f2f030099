"""Symmetric negative-cosine SimSiam criterion with stop-gradient targets."""
from __future__ import annotations

import numpy as np


def _unit(x, what):
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise FloatingPointError(f"zero-norm {what} vector")
    return x / norm, norm


def cosine(a, b):
    ua, _ = _unit(a, "first")
    ub, _ = _unit(b, "second")
    return np.sum(ua * ub, axis=-1)


def per_sample_loss(z_i, p_i, z_j, p_j):
    """``-0.5 * (cos(p_i, z_j) + cos(p_j, z_i))`` for each sample."""
    return -0.5 * (cosine(p_i, z_j) + cosine(p_j, z_i))


def simsiam_loss(z_i, p_i, z_j, p_j) -> float:
    """Batch-mean SimSiam loss; a scalar in [-1, 1]."""
    return float(np.mean(per_sample_loss(z_i, p_i, z_j, p_j)))


def _cos_grad(p, target):
    # d cos(p, target) / d p with target held constant
    up, pn = _unit(p, "prediction")
    ut, _ = _unit(target, "target")
    c = np.sum(up * ut, axis=-1, keepdims=True)
    return (ut - c * up) / pn


def simsiam_loss_grad(z_i, p_i, z_j, p_j):
    """Loss and gradients ``(dz_i, dp_i, dz_j, dp_j)`` of the batch mean.

    The ``z`` arguments are stop-gradient targets, so their gradients are
    exactly zero.
    """
    n = p_i.shape[0]
    loss = simsiam_loss(z_i, p_i, z_j, p_j)
    dp_i = -0.5 / n * _cos_grad(p_i, z_j)
    dp_j = -0.5 / n * _cos_grad(p_j, z_i)
    return loss, np.zeros_like(z_i), dp_i, np.zeros_like(z_j), dp_j
