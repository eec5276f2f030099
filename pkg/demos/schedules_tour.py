"""Cosine annealing against the fixed 1-cycle schedule.

The fixed 1-cycle schedule (F1-CLR) climbs to its peak over a fixed number of
warm-up steps, then anneals. Momentum moves the opposite way, so the
gradient noise scale lr / (1 - beta) stays in check while the lr is high.
Stretching the run only stretches the decay.
"""
from effssl.schedules import ScheduleConfig, ScheduleKind, noise_scale, schedule_point

L, TW = 3000, 500
cosine = ScheduleConfig(ScheduleKind.COSINE_ANNEALING, L, 0.05)
f1clr = ScheduleConfig(ScheduleKind.FIXED_ONE_CYCLE, L, 0.1, warmup_steps=TW)

print(f"{'step':>5}  {'cosine lr':>10}  {'f1clr lr':>10}  {'f1clr beta':>10}  {'noise scale':>11}")
for t in (0, 100, 250, 500, 1000, 2000, 2900, 3000):
    c, f = schedule_point(t, cosine), schedule_point(t, f1clr)
    g = noise_scale(f.lr, 1600, 64, f.momentum).noise_scale
    print(f"{t:>5}  {c.lr:>10.5f}  {f.lr:>10.5f}  {f.momentum:>10.4f}  {g:>11.3f}")

# the warm-up trace is the same whatever the total length
short = ScheduleConfig(ScheduleKind.FIXED_ONE_CYCLE, 800, 0.1, warmup_steps=TW)
same = all(schedule_point(t, short) == schedule_point(t, f1clr) for t in range(TW + 1))
print(f"\nwarm-up identical for L=800 and L={L}: {same}")

# a plain 1-cycle ties its peak to a fraction of the run instead
for total in (1000, 3000, 9000):
    oc = ScheduleConfig(ScheduleKind.ONE_CYCLE, total, 0.1, phase_fraction=0.3)
    print(f"1-cycle with L={total}: peak at step {oc.peak_step:g}")
