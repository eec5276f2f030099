"""Learning-rate range test on a quadratic, where the answer is known.

Gradient descent on 0.5 * lam * x^2 is stable for lr < 2 / lam. The range test
sweeps lr geometrically, one step per lr, and reports:
- min_lr: where the smoothed loss starts to fall.
- max_lr: the lr just before the loss bottoms out ahead of divergence or the
  end of the plateau.
"""
import sys

from effssl.lr_finder import RangeTestConfig, quadratic_trainer, run_range_test

cfg = RangeTestConfig(1e-4, 10.0, 200)
print(f"{'lambda':>9}  {'2/lambda':>9}  {'min_lr':>9}  {'max_lr':>9}  diverged")
for lam in (0.5, 3.0, 20.0, 150.0, 1000.0):
    r = run_range_test(quadratic_trainer(lam), cfg)
    print(f"{lam:>9g}  {2 / lam:>9.4g}  {r.min_lr:>9.4g}  {r.max_lr:>9.4g}  {r.diverged}")

# the same test on the SimSiam simulator takes ~20 s; pass --sim to run it
if "--sim" in sys.argv:
    from effssl.config import ExperimentConfig
    from effssl.sim.train import range_test_trainer

    sim_cfg = RangeTestConfig(1e-3, 1.0, 200, loss_floor=-1.0)
    r = run_range_test(range_test_trainer(ExperimentConfig(), sim_cfg.val_batch_size), sim_cfg)
    print(f"\nsimulator: min_lr {r.min_lr:.4g}, max_lr {r.max_lr:.4g}, diverged {r.diverged}")
