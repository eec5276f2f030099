"""Finite-difference check of the hand-written backward pass."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .loss import simsiam_loss, simsiam_loss_grad
from .model import backward, forward


@dataclass
class GradCheckReport:
    max_rel_error: float
    checked: int
    worst: tuple  # (parameter name, flat index)
    target_grad_max: float  # largest |grad| reaching parameters through the z targets
    skipped: int = 0  # coordinates whose every probe crossed a ReLU kink


def rel_error(a, b, floor=1e-6):
    # the floor keeps exactly-zero gradients (a dead unit, or a shift that
    # batch standardization cancels) from turning finite-difference roundoff
    # (~1e-12 here) into large relative errors
    return abs(a - b) / max(abs(a) + abs(b), floor)


def analytic_grads(params, vi, vj):
    zi, pi, _, ci = forward(params, vi)
    zj, pj, _, cj = forward(params, vj)
    loss, dzi, dpi, dzj, dpj = simsiam_loss_grad(zi, pi, zj, pj)
    gi, gj = backward(params, ci, dpi, dzi), backward(params, cj, dpj, dzj)
    return loss, {k: gi[k] + gj[k] for k in gi}, (zi, zj), (ci, cj, dzi, dzj)


# layers followed by a ReLU; their activation sign pattern locates kinks
_KINKED = ("conv", "proj1", "pred1")


def _relu_pattern(cache):
    return [act > 0 for name, act in cache["acts"] if name.startswith(_KINKED)]


def gradient_check(params, vi, vj, samples_per_tensor=6, eps=1e-5, seed=0,
                   names=None, retries=3) -> GradCheckReport:
    """Max relative error between analytic and central-difference gradients.

    Runs in float64. The stop-gradient targets ``z`` are frozen at their
    unperturbed values, which is what stop-gradient means. ``names`` limits
    the check to some parameter tensors.

    A central difference straddling a ReLU kink measures nothing useful, so
    when any activation changes sign between the two probes the step shrinks
    tenfold, up to ``retries`` times, and the coordinate is skipped after that.
    """
    if names is not None and not set(names) <= set(params):
        raise KeyError(f"unknown parameter tensors: {sorted(set(names) - set(params))}")
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}
    vi, vj = np.asarray(vi, np.float64), np.asarray(vj, np.float64)
    _, grads, (zi0, zj0), (ci, cj, dzi, dzj) = analytic_grads(params, vi, vj)

    # gradient through the target path alone must be exactly zero
    zero_dp = np.zeros_like(zi0)
    through_z = [backward(params, c, zero_dp, dz) for c, dz in ((ci, dzi), (cj, dzj))]
    target_max = max(float(np.max(np.abs(g))) for t in through_z for g in t.values())

    def loss_at():
        _, pi, _, c1 = forward(params, vi)
        _, pj, _, c2 = forward(params, vj)
        return simsiam_loss(zi0, pi, zj0, pj), _relu_pattern(c1) + _relu_pattern(c2)

    def central_difference(flat, idx):
        old, h = flat[idx], eps
        for _ in range(retries + 1):
            flat[idx] = old + h
            up, up_mask = loss_at()
            flat[idx] = old - h
            down, down_mask = loss_at()
            flat[idx] = old
            if all(np.array_equal(a, b) for a, b in zip(up_mask, down_mask)):
                return (up - down) / (2 * h)
            h /= 10
        return None

    rng = np.random.default_rng(seed)
    worst, worst_at, checked, skipped = 0.0, None, 0, 0
    for name, theta in params.items():
        if names is not None and name not in names:
            continue
        flat = theta.reshape(-1)
        picks = rng.choice(flat.size, size=min(samples_per_tensor, flat.size), replace=False)
        for idx in picks:
            numeric = central_difference(flat, idx)
            if numeric is None:
                skipped += 1
                continue
            err = rel_error(float(grads[name].reshape(-1)[idx]), numeric)
            checked += 1
            if err > worst or worst_at is None:
                worst, worst_at = err, (name, int(idx))
    return GradCheckReport(worst, checked, worst_at, target_max, skipped)
