"""Super Progressive resolution staircase and augmentation-magnitude ramp.

The resolution stays at ``res_max`` for the learning-rate warm-up, drops to
``res_min`` and climbs back to ``res_max`` in ``num_stages`` equal stages.
The augmentation magnitude ramps linearly over the whole run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .schedules import StepRangeError


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class ProgressivePlan:
    total_steps: int
    warmup_steps: int
    res_min: int
    res_max: int
    quantum: int = 32
    num_stages: int | None = None
    mag_min: float = 5.0
    mag_max: float = 5.0

    def __post_init__(self):
        if self.total_steps < 1:
            raise PlanError(f"total_steps must be >= 1, got {self.total_steps}")
        if not 0 <= self.warmup_steps < self.total_steps:
            raise PlanError(f"warmup_steps must lie in [0, total_steps), got {self.warmup_steps}")
        if self.quantum < 1:
            raise PlanError(f"quantum must be >= 1, got {self.quantum}")
        for name in ("res_min", "res_max"):
            r = getattr(self, name)
            if r <= 0 or r % self.quantum:
                raise PlanError(f"{name}={r} is not a positive multiple of {self.quantum}")
        if self.res_min > self.res_max:
            raise PlanError(f"res_min {self.res_min} > res_max {self.res_max}")
        if self.mag_min > self.mag_max:
            raise PlanError(f"mag_min {self.mag_min} > mag_max {self.mag_max}")
        if self.num_stages is None:
            object.__setattr__(
                self, "num_stages", (self.res_max - self.res_min) // self.quantum + 1
            )
        if self.num_stages < 1:
            raise PlanError(f"num_stages must be >= 1, got {self.num_stages}")

    @classmethod
    def constant(cls, total_steps, resolution, magnitude=5.0, quantum=None):
        q = quantum or resolution
        return cls(total_steps, 0, resolution, resolution, q, 1, magnitude, magnitude)


@dataclass(frozen=True)
class CurriculumPoint:
    step: int
    resolution: int
    magnitude: float


def round_to_quantum(x, q):
    """Nearest multiple of ``q``; halves round up."""
    return q * math.floor(Fraction(x) / q + Fraction(1, 2))


def _check_step(t, plan):
    if not 0 <= t <= plan.total_steps:
        raise StepRangeError(f"step {t} outside [0, {plan.total_steps}]")


def stage_at(t, plan: ProgressivePlan) -> int:
    """Stage index after warm-up; -1 during warm-up."""
    _check_step(t, plan)
    if t < plan.warmup_steps:
        return -1
    K = plan.num_stages
    s = (t - plan.warmup_steps) * K // (plan.total_steps - plan.warmup_steps)
    return min(max(s, 0), K - 1)


def stage_resolutions(plan: ProgressivePlan) -> list[int]:
    K = plan.num_stages
    if K == 1:
        return [plan.res_max]
    out = []
    for s in range(K):
        step = Fraction(s * (plan.res_max - plan.res_min), K - 1)
        r = plan.res_min + round_to_quantum(step, plan.quantum)
        out.append(min(max(r, plan.res_min), plan.res_max))
    return out


def resolution_at(t, plan: ProgressivePlan) -> int:
    s = stage_at(t, plan)
    if s < 0:
        return plan.res_max
    return stage_resolutions(plan)[s]


def magnitude_at(t, plan: ProgressivePlan) -> float:
    _check_step(t, plan)
    return plan.mag_min + (plan.mag_max - plan.mag_min) * t / plan.total_steps


def curriculum_point(t, plan: ProgressivePlan) -> CurriculumPoint:
    return CurriculumPoint(t, resolution_at(t, plan), magnitude_at(t, plan))


def resolution_sequence(plan: ProgressivePlan) -> np.ndarray:
    """Resolution of each of the ``total_steps`` training iterations."""
    stages = stage_resolutions(plan)
    out = np.empty(plan.total_steps, dtype=np.int64)
    for t in range(plan.total_steps):
        s = stage_at(t, plan)
        out[t] = plan.res_max if s < 0 else stages[s]
    return out


def progressive_speedup(plan: ProgressivePlan, reference=None) -> float:
    """Mean per-step speedup ``(1/L) * sum_t (r_ref / r_t)**2``.

    ``reference`` defaults to the plan's ``res_max``.
    """
    r_ref = plan.res_max if reference is None else reference
    r = resolution_sequence(plan).astype(np.float64)
    return float(np.sum((r_ref / r) ** 2) / plan.total_steps)


def cost_ratio(plan: ProgressivePlan) -> float:
    """FLOPs-weighted speedup ``L * r_max**2 / sum_t r_t**2`` under a quadratic cost."""
    r = resolution_sequence(plan)
    return plan.total_steps * plan.res_max**2 / float(np.sum(r * r))
