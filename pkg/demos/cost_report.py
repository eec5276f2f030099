"""Where the savings come from: fewer steps times cheaper steps.

A training plan is a resolution per step (plus an optional selection pass).
Its FLOPs come from a per-resolution forward profile. A step costs
C = 6 forwards (two views, backward counted as two forwards), plus m forwards
at the selection resolution.
"""
from effssl.cost import FlopsProfile, TrainingPlan, compare
from effssl.hard_augment import SelectionConfig
from effssl.presets import baseline, cost_against_baseline, efficient, nominal_plan

# 170 steps at 14 units against 100 steps at 10 units
toy = FlopsProfile({1: 10, 2: 14}, cost_ratio=1)
rep = compare(TrainingPlan.constant(170, 2), TrainingPlan.constant(100, 1), toy)
print(f"toy: {rep.steps_ratio:g} x {rep.per_step_ratio:g} = {rep.combined_speedup:.4g}\n")

# desk presets under a pure r^2 model...
quad = compare(nominal_plan(baseline()), nominal_plan(efficient()), FlopsProfile.quadratic(1))
print("quadratic model")
print(quad.to_text())

# ...and under the simulator's own counter, where dense layers do not shrink with r
print("\nmeasured simulator profile")
print(cost_against_baseline(efficient(), baseline()).to_text())

# selection adds a fixed per-step cost
for m in (2, 4, 6, 8):
    plan = TrainingPlan.constant(100, 32, SelectionConfig(m, 8, 32))
    r = compare(TrainingPlan.constant(100, 32), plan, FlopsProfile.quadratic(1))
    print(f"m={m}: selection costs {100 * (1 / r.combined_speedup - 1):.2f}% extra")
