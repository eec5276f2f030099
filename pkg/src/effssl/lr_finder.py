"""Learning-rate range test.

The learning rate grows geometrically from ``lr_lo`` to ``lr_hi`` while a
trainer reports train and validation loss at every step. ``min_lr`` is where
the smoothed validation loss starts to fall, ``max_lr`` where the train loss
starts to diverge (or where it stops improving).

Losses are smoothed as ``log(loss - loss_floor)``, so the thresholds are
ratios above a known lower bound of the loss (0 for squared errors, -1 for
negative cosine) and a loss that spans many decades does not leave the
average stuck on its early values.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable


@dataclass(frozen=True)
class RangeTestConfig:
    lr_lo: float = 1e-3
    lr_hi: float = 1.0
    sweep_steps: int = 200
    val_batch_size: int = 256
    smoothing: float = 0.05
    divergence_factor: float = 2.0
    decrease_delta: float = 0.01
    persistence: int = 5
    loss_floor: float = 0.0

    def __post_init__(self):
        if not 0 < self.lr_lo < self.lr_hi:
            raise ValueError(f"need 0 < lr_lo < lr_hi, got {self.lr_lo}, {self.lr_hi}")
        if self.sweep_steps < 10:
            raise ValueError(f"sweep_steps must be >= 10, got {self.sweep_steps}")
        if not 0 < self.smoothing < 1:
            raise ValueError(f"smoothing must be in (0, 1), got {self.smoothing}")
        if not self.divergence_factor > 1:
            raise ValueError(f"divergence_factor must be > 1, got {self.divergence_factor}")


@dataclass
class RangeTestResult:
    min_lr: float
    max_lr: float
    min_detected: bool
    diverged: bool
    trace: list = field(default_factory=list)  # (step, lr, train_loss, val_loss)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "lr", "train_loss", "val_loss"])
            for step, lr, tl, vl in self.trace:
                w.writerow([step, f"{lr:.9g}", f"{tl:.9g}", f"{vl:.9g}"])


def lr_sweep(t, cfg: RangeTestConfig) -> float:
    if not 0 <= t < cfg.sweep_steps:
        raise ValueError(f"step {t} outside [0, {cfg.sweep_steps})")
    if t == cfg.sweep_steps - 1:
        return cfg.lr_hi
    return cfg.lr_lo * (cfg.lr_hi / cfg.lr_lo) ** (t / (cfg.sweep_steps - 1))


def ema(values, coefficient):
    """Bias-corrected exponential moving average."""
    out, avg, decay = [], 0.0, 1.0 - coefficient
    for k, v in enumerate(values):
        avg = decay * avg + coefficient * v
        out.append(avg / (1.0 - decay ** (k + 1)))
    return out


def _log_excess(values, floor):
    return [math.log(max(v - floor, 1e-300)) for v in values]


def run_range_test(trainer: Callable[[float], tuple], cfg: RangeTestConfig) -> RangeTestResult:
    """Sweep ``trainer(lr) -> (train_loss, val_loss)`` and locate the usable LR band.

    ``trainer`` must take one optimizer step at ``lr`` and report the losses
    measured at that step.
    """
    trace, lrs, train, val = [], [], [], []
    stopped = False
    for t in range(cfg.sweep_steps):
        lr = lr_sweep(t, cfg)
        tl, vl = trainer(lr)
        tl, vl = float(tl), float(vl)
        if not (math.isfinite(tl) and math.isfinite(vl)):
            stopped = True
            break
        trace.append((t, lr, tl, vl))
        lrs.append(lr)
        train.append(tl)
        val.append(vl)

    if not lrs:
        return RangeTestResult(cfg.lr_lo, cfg.lr_lo, False, True, trace)

    s_train = ema(_log_excess(train, cfg.loss_floor), cfg.smoothing)
    s_val = ema(_log_excess(val, cfg.loss_floor), cfg.smoothing)
    log_div = math.log(cfg.divergence_factor)

    # max_lr
    diverged, max_lr = stopped, lrs[-1]
    run_min, hit = math.inf, None
    for t, s in enumerate(s_train):
        run_min = min(run_min, s)
        if s > run_min + log_div:
            hit = t
            break
    if hit is None and not stopped:
        # plateau end: last step still within decrease_delta of the running minimum
        run_min, hit = math.inf, 0
        for t, s in enumerate(s_train):
            run_min = min(run_min, s)
            if s <= run_min + math.log1p(cfg.decrease_delta):
                hit = t
    else:
        diverged = True
    if hit is not None:
        # the smoothed curve lags; back off to the step before the raw loss bottomed out
        turn = min(range(hit + 1), key=lambda k: (train[k], k))
        max_lr = lrs[max(turn - 1, 0)]

    # min_lr
    target = s_val[0] + math.log1p(-cfg.decrease_delta)
    min_lr, min_detected, streak = cfg.lr_lo, False, 0
    for t, s in enumerate(s_val):
        streak = streak + 1 if s < target else 0
        if streak == cfg.persistence:
            min_lr, min_detected = lrs[t - cfg.persistence + 1], True
            break
    min_lr = min(min_lr, max_lr)
    return RangeTestResult(min_lr, max_lr, min_detected, diverged, trace)


def quadratic_trainer(curvature, theta0=1.0):
    """Plain SGD on ``0.5 * curvature * theta^2``; a closed-form test bed."""
    state = {"theta": float(theta0)}

    def step(lr):
        theta = state["theta"]
        loss = 0.5 * curvature * theta * theta
        state["theta"] = theta - lr * curvature * theta
        return loss, loss

    return step
