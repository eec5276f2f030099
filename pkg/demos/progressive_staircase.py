"""The progressive resolution staircase and what it saves.

Training starts at full resolution for the warm-up, drops to the smallest
resolution, and climbs back in equal-length stages. Augmentation magnitude
ramps linearly over the whole run, so the strongest augmentations land on the
largest images.
"""
from collections import Counter

from effssl.progressive import (
    ProgressivePlan,
    cost_ratio,
    curriculum_point,
    progressive_speedup,
    resolution_sequence,
    stage_resolutions,
)

plan = ProgressivePlan(120, 10, 96, 224, 32, mag_min=4, mag_max=6)
print("stages:", stage_resolutions(plan))
print("steps per resolution:", dict(sorted(Counter(resolution_sequence(plan).tolist()).items())))

for t in (0, 9, 10, 31, 32, 60, 100, 119, 120):
    p = curriculum_point(t, plan)
    print(f"  t={t:>3}  resolution {p.resolution:>3}  magnitude {p.magnitude:.3f}")

# mean per-step speedup vs FLOPs-weighted ratio under an r^2 cost
print(f"\nmean per-step speedup  {progressive_speedup(plan):.4f}")
print(f"r^2-weighted cost ratio {cost_ratio(plan):.4f}")

# the desk-scale analogue: 32 px images, 16 px floor, quantum 4
desk = ProgressivePlan(3000, 500, 16, 32, 4, mag_min=4, mag_max=6)
print(f"\ndesk stages {stage_resolutions(desk)}, speedup {progressive_speedup(desk):.4f}")
