"""A short SimSiam run on the synthetic dataset, end to end.

First, a finite-difference check of the hand-written backward pass. Then a
short baseline run and a short efficient run (F1-CLR, progressive
resolution, hard augment). For each it prints the kNN accuracy and the FLOPs
the trainer counted.

The full-length comparison (200 vs 120 epochs, three seeds) is in the
acceptance tests. Pass an epoch count to make this one longer:
``python3 demos/simsiam_desk_run.py 60``.
"""
import sys
import time

import numpy as np

from effssl.presets import baseline, efficient
from effssl.sim.gradcheck import gradient_check
from effssl.sim.model import Architecture, init_params
from effssl.sim.train import train

params = init_params(Architecture(), seed=0, dtype=np.float64)
rng = np.random.default_rng(0)
rep = gradient_check(params, rng.random((4, 16, 16, 3)), rng.random((4, 16, 16, 3)))
print(f"gradient check: max relative error {rep.max_rel_error:.1e} over {rep.checked} "
      f"coordinates; gradient through the stop-grad target {rep.target_grad_max:g}")

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 15
runs = {
    "baseline": baseline(epochs=round(epochs * 5 / 3), knn_every=5),
    "efficient": efficient(epochs=epochs, warmup_epochs=max(1, epochs // 6), knn_every=5),
}
flops = {}
for name, cfg in runs.items():
    start = time.perf_counter()
    result = train(cfg)
    flops[name] = result.total_flops
    print(f"\n{name}: {cfg.epochs} epochs in {time.perf_counter() - start:.0f} s")
    for m in result.metrics:
        if m["knn_acc"] is not None:
            print(f"  epoch {m['epoch']:>3}  res {m['resolution']:>2}  loss {m['train_loss']:+.3f}  "
                  f"kNN {m['knn_acc']:.3f}")
print(f"\nefficient used {100 * flops['efficient'] / flops['baseline']:.1f}% of the baseline FLOPs")
