"""Closed-form learning-rate / momentum schedules.

All schedules are evaluated per optimizer iteration ``t`` in ``[0, L]``.
Evaluation at ``t == L`` is defined so exporters can emit ``L + 1`` rows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class ScheduleError(ValueError):
    """Invalid schedule configuration."""


class StepRangeError(ValueError):
    """Step outside ``[0, total_steps]``."""


class ScheduleKind(str, Enum):
    COSINE_ANNEALING = "cosine"
    COSINE_WARMUP = "cosine_warmup"
    ONE_CYCLE = "one_cycle"
    FIXED_ONE_CYCLE = "f1clr"


# momentum reported by schedules that do not cycle it
FIXED_MOMENTUM = 0.9


@dataclass(frozen=True)
class ScheduleConfig:
    kind: ScheduleKind
    total_steps: int
    lr_max: float
    warmup_steps: int = 0
    phase_fraction: float = 0.3
    beta_low: float = 0.85
    beta_high: float = 0.95
    momentum: float = FIXED_MOMENTUM

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.total_steps < 1:
            raise ScheduleError(f"total_steps must be >= 1, got {self.total_steps}")
        if not self.lr_max > 0:
            raise ScheduleError(f"lr_max must be > 0, got {self.lr_max}")
        if not 0 <= self.beta_low <= self.beta_high < 1:
            raise ScheduleError(
                f"need 0 <= beta_low <= beta_high < 1, got {self.beta_low}, {self.beta_high}"
            )
        if self.warmup_steps < 0 or self.warmup_steps >= self.total_steps:
            raise ScheduleError(
                f"warmup_steps must lie in [0, total_steps), got {self.warmup_steps}"
            )
        if self.kind in (ScheduleKind.COSINE_WARMUP, ScheduleKind.FIXED_ONE_CYCLE):
            if self.warmup_steps < 1:
                raise ScheduleError(f"{self.kind.value} needs warmup_steps >= 1")
        if self.kind is ScheduleKind.ONE_CYCLE:
            if not 0 < self.phase_fraction < 1:
                raise ScheduleError(f"phase_fraction must be in (0, 1), got {self.phase_fraction}")
            if self.phase_fraction * self.total_steps < 1:
                raise ScheduleError("phase_fraction * total_steps must be >= 1")

    @property
    def peak_step(self) -> float:
        """Step at which the learning rate peaks (0 for pure annealing)."""
        if self.kind is ScheduleKind.ONE_CYCLE:
            return self.phase_fraction * self.total_steps
        if self.kind is ScheduleKind.COSINE_ANNEALING:
            return 0.0
        return float(self.warmup_steps)


@dataclass(frozen=True)
class SchedulePoint:
    step: int
    lr: float
    momentum: float


def _check_step(t, total):
    if not 0 <= t <= total:
        raise StepRangeError(f"step {t} outside [0, {total}]")


def _half_cos(frac):
    # 1 at frac=0, 0 at frac=1
    return 0.5 * (math.cos(frac * math.pi) + 1.0)


def cosine_annealing(t, cfg: ScheduleConfig) -> float:
    _check_step(t, cfg.total_steps)
    return cfg.lr_max * _half_cos(t / cfg.total_steps)


def cosine_warmup(t, cfg: ScheduleConfig) -> float:
    _check_step(t, cfg.total_steps)
    tw, L = cfg.warmup_steps, cfg.total_steps
    if tw < 1 or tw >= L:
        raise ScheduleError(f"cosine warm-up needs 1 <= warmup_steps < total_steps, got {tw}")
    if t < tw:
        return t / tw * cfg.lr_max
    return cfg.lr_max * _half_cos((t - tw) / (L - tw))


def _cycle(t, peak, L, cfg):
    # shared body of 1-CLR and F1-CLR; `peak` is the end of the rising phase
    span = cfg.beta_high - cfg.beta_low
    if t < peak:
        w = _half_cos(t / peak)
        lr = cfg.lr_max - cfg.lr_max * w
        # beta_low + span*w, arranged so t=0 yields beta_high bit-exactly
        mom = cfg.beta_high - span * (1.0 - w)
    else:
        w = _half_cos((t - peak) / (L - peak))
        lr = cfg.lr_max * w
        mom = cfg.beta_high - span * w
    # rounding must not leave the configured band
    mom = min(max(mom, cfg.beta_low), cfg.beta_high)
    return SchedulePoint(t, lr, mom)


def one_cycle(t, cfg: ScheduleConfig) -> SchedulePoint:
    _check_step(t, cfg.total_steps)
    if not 0 < cfg.phase_fraction < 1:
        raise ScheduleError(f"phase_fraction must be in (0, 1), got {cfg.phase_fraction}")
    L = cfg.total_steps
    return _cycle(t, cfg.phase_fraction * L, L, cfg)


def fixed_one_cycle(t, cfg: ScheduleConfig) -> SchedulePoint:
    """1-cycle whose rising phase lasts exactly ``warmup_steps`` whatever ``L``."""
    _check_step(t, cfg.total_steps)
    tw, L = cfg.warmup_steps, cfg.total_steps
    if tw < 1 or tw >= L:
        raise ScheduleError(f"F1-CLR needs 1 <= warmup_steps < total_steps, got {tw}")
    return _cycle(t, tw, L, cfg)


def schedule_point(t, cfg: ScheduleConfig) -> SchedulePoint:
    """Dispatch on ``cfg.kind``; non-cyclic kinds report ``cfg.momentum``."""
    kind = cfg.kind
    if kind is ScheduleKind.COSINE_ANNEALING:
        return SchedulePoint(t, cosine_annealing(t, cfg), cfg.momentum)
    if kind is ScheduleKind.COSINE_WARMUP:
        return SchedulePoint(t, cosine_warmup(t, cfg), cfg.momentum)
    if kind is ScheduleKind.ONE_CYCLE:
        return one_cycle(t, cfg)
    return fixed_one_cycle(t, cfg)


def schedule_trace(cfg: ScheduleConfig) -> list[SchedulePoint]:
    return [schedule_point(t, cfg) for t in range(cfg.total_steps + 1)]


@dataclass(frozen=True)
class NoiseScaleReport:
    noise_scale: float
    lr: float
    dataset_size: int
    batch_size: int
    momentum: float


def noise_scale(lr, dataset_size, batch_size, momentum=0.0) -> NoiseScaleReport:
    """SGD gradient-noise scale ``g ~= lr * |D| / (b * (1 - momentum))``."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    if momentum >= 1:
        raise ZeroDivisionError(f"noise scale is singular for momentum >= 1 (got {momentum})")
    g = lr * dataset_size / (batch_size * (1.0 - momentum))
    return NoiseScaleReport(g, lr, dataset_size, batch_size, momentum)
