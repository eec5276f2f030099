"""Hard augment: pick the most dissimilar pair of views to train on.

Each image gets m augmented views. A forward-only pass at a small selection
resolution scores all m(m-1)/2 pairs, and the pair with the highest loss is
re-embedded at training resolution for the real step. The extra cost is that
cheap pass.
"""
import numpy as np

from effssl.hard_augment import (
    SelectionConfig,
    enumerate_pairs,
    hard_select_batch,
    pairwise_loss_matrix,
    select_hardest,
    selection_overhead,
)
from effssl.sim.augment import AugmentationPolicy, augment_batch
from effssl.sim.data import SynthDatasetConfig, generate_dataset
from effssl.sim.loss import per_sample_loss
from effssl.sim.model import Architecture, forward, init_params

print("overhead of the selection pass (r=224, C=6):")
for m in (2, 4, 6, 8):
    for r_sel in (32, 64, 96):
        kept, over = selection_overhead(SelectionConfig(m, r_sel, 224, 6))
        print(f"  m={m} r_sel={r_sel:>2}: {100 * over:5.2f}%")

print("\npairs for m=4:", [tuple(p) for p in enumerate_pairs(4)])
print("hardest of", [0.1, 0.9, 0.3, 0.2, 0.4, 0.5], "->", select_hardest([0.1, 0.9, 0.3, 0.2, 0.4, 0.5]))
print("ties resolve to the first pair:", select_hardest([0.7] * 6))

# the real thing on a few synthetic images with an untrained encoder
data = generate_dataset(SynthDatasetConfig(num_classes=2, samples_per_class=10))
rng = np.random.default_rng(0)
views = [augment_batch(data.train_x[:6], AugmentationPolicy(), 32, rng) for _ in range(4)]
params = init_params(Architecture())


def pair_losses(small_views):
    out = [forward(params, v, keep_cache=False)[:2] for v in small_views]
    return pairwise_loss_matrix(out, lambda a, b: per_sample_loss(a[0], a[1], b[0], b[1]))


picked = hard_select_batch(views, pair_losses, SelectionConfig(4, 8, 32))
print("\nchosen pair per image:", [tuple(p) for p in picked.pairs.tolist()])
print("chosen loss vs mean pair loss:",
      np.round(picked.chosen_losses, 3), np.round(picked.losses.mean(axis=1), 3))
