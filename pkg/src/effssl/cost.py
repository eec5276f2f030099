"""FLOPs accounting for training plans and baseline-vs-efficient speedups."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .hard_augment import SelectionConfig

CONVENTION = (
    "per step: batch x (C x forward(r_t) + m x forward(r_sel)); "
    "C counts a training iteration in single-view forward passes "
    "(C=6: two views, backward = 2 x forward); selection pass is forward-only"
)


class ProfileError(KeyError):
    pass


def _exact(x):
    # keep integral values as ints so sums stay exact
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    return int(x) if x.is_integer() else x


@dataclass
class FlopsProfile:
    """Per-sample forward FLOPs by input resolution."""

    flops: dict
    cost_ratio: float = 6
    interpolate: bool = False

    def __post_init__(self):
        self.flops = {int(r): _exact(f) for r, f in sorted(self.flops.items())}
        if not self.flops:
            raise ProfileError("empty FLOPs profile")
        vals = list(self.flops.values())
        if any(v <= 0 for v in vals):
            raise ProfileError("FLOPs counts must be positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ProfileError("FLOPs must increase strictly with resolution")
        self.cost_ratio = _exact(self.cost_ratio)

    @classmethod
    def quadratic(cls, k=1.0, resolutions=(), cost_ratio=6):
        """Analytic profile ``FLOPs(r) = k r^2``; other resolutions are interpolated."""
        res = tuple(resolutions) or (1,)
        return cls({r: k * r * r for r in res}, cost_ratio, interpolate=True)

    def forward(self, resolution):
        r = int(resolution)
        if r in self.flops:
            return self.flops[r]
        if not self.interpolate:
            raise ProfileError(f"no FLOPs entry for resolution {r}")
        # quadratic scaling from the nearest measured resolution
        ref = min(self.flops, key=lambda q: (abs(q - r), q))
        return self.flops[ref] * (r / ref) ** 2

    def scaled(self, factor):
        return FlopsProfile(
            {r: f * factor for r, f in self.flops.items()}, self.cost_ratio, self.interpolate
        )


@dataclass
class TrainingPlan:
    resolutions: Sequence[int]
    selection: SelectionConfig | None = None
    batch_size: int = 1

    def __post_init__(self):
        self.resolutions = np.asarray(self.resolutions, dtype=np.int64)
        if self.resolutions.ndim != 1 or self.resolutions.size == 0:
            raise ValueError("a plan needs a non-empty 1-D resolution sequence")

    @property
    def total_steps(self):
        return int(self.resolutions.size)

    @classmethod
    def constant(cls, steps, resolution, selection=None, batch_size=1):
        return cls(np.full(steps, resolution), selection, batch_size)


@dataclass
class CostReport:
    baseline_flops: float
    efficient_flops: float
    baseline_steps: int
    efficient_steps: int
    steps_ratio: float
    per_step_ratio: float
    combined_speedup: float
    convention: str = field(default=CONVENTION)

    @property
    def flops_fraction(self):
        return self.efficient_flops / self.baseline_flops

    def to_record(self):
        return asdict(self)

    def to_text(self):
        rows = [
            ("baseline FLOPs", f"{self.baseline_flops:.6g}"),
            ("efficient FLOPs", f"{self.efficient_flops:.6g}"),
            ("steps ratio", f"{self.steps_ratio:.4f}x"),
            ("per-step ratio", f"{self.per_step_ratio:.4f}x"),
            ("combined speedup", f"{self.combined_speedup:.4f}x"),
            ("efficient / baseline", f"{100 * self.flops_fraction:.2f}%"),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k:<{width}}  {v}" for k, v in rows]
        lines.append(f"convention: {self.convention}")
        return "\n".join(lines)


def step_flops(resolution, profile: FlopsProfile, selection=None, batch_size=1):
    per_sample = profile.cost_ratio * profile.forward(resolution)
    if selection is not None:
        per_sample += selection.num_positives * profile.forward(selection.selection_resolution)
    return batch_size * per_sample


def plan_flops(plan: TrainingPlan, profile: FlopsProfile):
    """Total training FLOPs of ``plan`` under ``profile``."""
    res, counts = np.unique(plan.resolutions, return_counts=True)
    total = 0
    for r, n in zip(res.tolist(), counts.tolist()):
        total += n * profile.forward(r)
    total = profile.cost_ratio * total
    sel = plan.selection
    if sel is not None:
        total += plan.total_steps * sel.num_positives * profile.forward(sel.selection_resolution)
    return plan.batch_size * total


def compare(baseline: TrainingPlan, efficient: TrainingPlan, profile: FlopsProfile) -> CostReport:
    b = plan_flops(baseline, profile)
    e = plan_flops(efficient, profile)
    nb, ne = baseline.total_steps, efficient.total_steps
    return CostReport(
        baseline_flops=b,
        efficient_flops=e,
        baseline_steps=nb,
        efficient_steps=ne,
        steps_ratio=nb / ne,
        per_step_ratio=(b / nb) / (e / ne),
        combined_speedup=b / e,
    )
