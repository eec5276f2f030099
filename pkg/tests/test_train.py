from dataclasses import replace

import numpy as np
import pytest

from effssl.config import ExperimentConfig
from effssl.cost import plan_flops
from effssl.sim.model import Architecture
from effssl.sim.train import TrainingError, range_test_trainer, train

ARCH = Architecture(conv_channels=(4, 8, 8), embed_dim=16, pred_hidden=8)
TINY = ExperimentConfig(
    num_classes=3, samples_per_class=40, batch_size=16, epochs=4, warmup_epochs=1,
    knn_k=5, knn_every=2,
)


def run(tmp_path=None, **kw):
    return train(replace(TINY, **kw), tmp_path, ARCH)


def test_bit_identical_reruns(tmp_path):
    run(tmp_path / "a")
    run(tmp_path / "b")
    for name in ("metrics.jsonl", "config.txt", "checkpoint.bin", "checkpoint.manifest"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_two_positives_equal_no_selection():
    a = run(hard_augment=True, num_positives=2)
    b = run(hard_augment=False)
    assert a.metrics == b.metrics
    assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)


@pytest.mark.parametrize("kw", [
    dict(),
    dict(hard_augment=False),
    dict(schedule="cosine", warmup_epochs=0, min_resolution=32, hard_augment=False),
    dict(num_positives=3, selection_resolution=12, resolution_quantum=4),
])
def test_flops_counter_matches_cost_model(kw):
    r = run(**kw)
    assert plan_flops(r.plan, r.profile) == r.total_flops
    flops = [m["cumulative_flops"] for m in r.metrics]
    assert flops == sorted(flops) and flops[-1] == r.total_flops


def test_records_follow_curriculum():
    r = run(epochs=6, warmup_epochs=2)
    assert [m["epoch"] for m in r.metrics] == list(range(1, 7))
    assert r.metrics[0]["resolution"] == 32
    assert r.metrics[-1]["resolution"] == 32
    assert min(m["resolution"] for m in r.metrics) < 32
    mags = [m["magnitude"] for m in r.metrics]
    assert mags == sorted(mags) and 4.0 <= mags[0] and mags[-1] <= 6.0
    evals = [m["knn_acc"] is not None for m in r.metrics]
    assert evals == [False, True, False, True, False, True]


def test_selections_recorded():
    r = train(TINY, None, ARCH, record_selections=True)
    assert len(r.selections) == r.plan.total_steps
    out = r.selections[0]
    assert out.losses.shape == (16, 6)
    chosen = out.chosen_losses
    assert np.all(chosen == out.losses.max(axis=1))


def test_numeric_failure_reports_iteration(tmp_path):
    with pytest.raises(TrainingError, match="iteration"):
        run(tmp_path, lr=1e12, schedule="cosine", warmup_epochs=0)
    assert (tmp_path / "metrics.jsonl").exists()


def test_range_test_trainer_runs():
    step = range_test_trainer(TINY, val_batch_size=8, arch=ARCH)
    losses = [step(lr) for lr in (1e-3, 1e-2, 1e-1)]
    assert all(-1 <= v <= 1 for pair in losses for v in pair)
    bad = range_test_trainer(TINY, val_batch_size=8, arch=ARCH)
    assert any(np.isnan(bad(1e15)[0]) for _ in range(5))
