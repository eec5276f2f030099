"""End-to-end efficient SSL training loop at desk scale.

Each iteration queries the LR/momentum schedule and the resolution/magnitude
curriculum, draws views, optionally keeps the hardest pair, and takes one
SGD-momentum step on the SimSiam loss.
"""
from __future__ import annotations

import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import ExperimentConfig, render_config
from ..cost import FlopsProfile, TrainingPlan
from ..hard_augment import SelectionConfig, SelectionError, gather_pair, hard_select_batch, pairwise_loss_matrix
from ..progressive import magnitude_at, resolution_at
from ..schedules import schedule_point
from .augment import AugmentationPolicy, augment_batch
from .checkpoint import save_checkpoint
from .data import generate_dataset
from .knn import knn_eval
from .loss import per_sample_loss, simsiam_loss_grad
from .model import Architecture, encode, forward, init_params, backward
from .optim import OptimizerState, sgd_momentum_step

log = logging.getLogger(__name__)

# backward pass counted as twice the forward FLOPs
BACKWARD_MULTIPLIER = 2
# training cost of one sample in single-view forward passes: two views, fwd + bwd
ITERATION_COST_RATIO = 2 * (1 + BACKWARD_MULTIPLIER)


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainResult:
    config: ExperimentConfig
    metrics: list
    params: dict
    plan: TrainingPlan
    profile: FlopsProfile
    total_flops: int
    selections: list = field(default_factory=list)

    @property
    def final(self):
        return self.metrics[-1]


def measured_profile(params, resolutions) -> FlopsProfile:
    """FLOPs profile read off the forward counter with one dummy sample per resolution."""
    flops = {}
    for r in sorted(set(int(r) for r in resolutions)):
        _, _, f, _ = forward(params, np.zeros((2, r, r, 3), params["conv1.w"].dtype), False)
        flops[r] = f // 2
    return FlopsProfile(flops, ITERATION_COST_RATIO)


def embed_dataset(params, images, stats=None, chunk=256):
    """Embed ``images``; without ``stats`` the whole set is one batch and its statistics are returned."""
    if stats is None:
        return encode(params, images)
    feats = [encode(params, images[i : i + chunk], stats)[0] for i in range(0, len(images), chunk)]
    return np.concatenate(feats), stats


def evaluate(params, data, k):
    """kNN accuracy of backbone features plus mean per-dimension std of unit features."""
    ref, stats = embed_dataset(params, data.train_x)
    qry, _ = embed_dataset(params, data.eval_x, stats)
    acc = knn_eval(ref, data.train_y, qry, data.eval_y, k=k)
    unit = qry / np.maximum(np.linalg.norm(qry, axis=1, keepdims=True), 1e-12)
    return acc, float(unit.std(axis=0).mean())


def train(cfg: ExperimentConfig, out_dir=None, arch=Architecture(), record_selections=False):
    """Run one experiment; if ``out_dir`` is given, write metrics, config and checkpoint there."""
    data = generate_dataset(cfg.dataset_config())
    seeds = np.random.SeedSequence(cfg.seed).spawn(3)
    init_rng, loader_rng, aug_rng = (np.random.default_rng(s) for s in seeds)
    params = init_params(arch, seed=int(init_rng.integers(2**31)))
    state = OptimizerState(params, cfg.weight_decay)

    spe = len(data.train_x) // cfg.batch_size
    sched = cfg.schedule_config(spe)
    plan = cfg.progressive_plan(spe)
    policy = AugmentationPolicy()
    sel = cfg.selection_config()

    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.txt").write_text(render_config(cfg))
        metrics_fh = open(out / "metrics.jsonl", "w")
    metrics, resolutions, selections = [], [], []
    flops = 0
    t = 0

    def oracle(small):
        nonlocal flops
        outs = []
        for v in small:
            z, p, f, _ = forward(params, v, keep_cache=False)
            flops += f
            outs.append((z, p))
        return pairwise_loss_matrix(outs, lambda a, b: per_sample_loss(a[0], a[1], b[0], b[1]))

    try:
        for epoch in range(cfg.epochs):
            order = loader_rng.permutation(len(data.train_x))
            losses = []
            for b in range(spe):
                point = schedule_point(t, sched)
                res, mag = resolution_at(t, plan), magnitude_at(t, plan)
                x = data.train_x[order[b * cfg.batch_size : (b + 1) * cfg.batch_size]]
                views = [augment_batch(x, policy.at(mag), res, aug_rng) for _ in range(cfg.num_views)]
                try:
                    # non-finite values are detected explicitly below
                    with np.errstate(over="ignore", invalid="ignore"):
                        if sel is not None:
                            step_sel = SelectionConfig(sel.num_positives, sel.selection_resolution, res)
                            outcome = hard_select_batch(views, oracle, step_sel)
                            vi, vj = gather_pair(views, outcome.pairs)
                            if record_selections:
                                selections.append(outcome)
                        else:
                            vi, vj = views[0], views[1]
                        zi, pi, fi, ci = forward(params, vi)
                        zj, pj, fj, cj = forward(params, vj)
                        loss, _, dpi, _, dpj = simsiam_loss_grad(zi, pi, zj, pj)
                except (FloatingPointError, SelectionError) as exc:
                    raise TrainingError(f"iteration {t}: {exc}") from exc
                if not np.isfinite(loss):
                    raise TrainingError(f"iteration {t}: non-finite loss")
                gi, gj = backward(params, ci, dpi), backward(params, cj, dpj)
                grads = {k: gi[k] + gj[k] for k in gi}
                sgd_momentum_step(state, grads, point.lr, point.momentum)
                flops += (1 + BACKWARD_MULTIPLIER) * (fi + fj)
                losses.append(loss)
                resolutions.append(res)
                t += 1

            rec = {
                "epoch": epoch + 1,
                "step": t,
                "lr": point.lr,
                "momentum": point.momentum,
                "resolution": res,
                "magnitude": mag,
                "train_loss": float(np.mean(losses)),
                "knn_acc": None,
                "embedding_std": None,
                "cumulative_flops": flops,
            }
            if (epoch + 1) % cfg.knn_every == 0 or epoch + 1 == cfg.epochs:
                rec["knn_acc"], rec["embedding_std"] = evaluate(params, data, cfg.knn_k)
            metrics.append(rec)
            if out is not None:
                metrics_fh.write(json.dumps(rec) + "\n")
                metrics_fh.flush()
            log.info("epoch %d loss %.4f knn %s", epoch + 1, rec["train_loss"], rec["knn_acc"])
    finally:
        if out is not None:
            metrics_fh.close()

    realized = TrainingPlan(resolutions, sel, cfg.batch_size)
    profile_res = set(resolutions) | ({sel.selection_resolution} if sel else set())
    profile = measured_profile(params, profile_res)
    if out is not None:
        save_checkpoint(params, out / "checkpoint")
    return TrainResult(cfg, metrics, params, realized, profile, flops, selections)


def range_test_trainer(cfg: ExperimentConfig, val_batch_size=256, arch=Architecture(),
                       resolution=None, momentum=0.9):
    """Step function for ``lr_finder.run_range_test`` on the SimSiam objective.

    Each call takes one SGD step at the given lr on the next training batch
    and returns ``(train_loss, val_loss)``; the validation loss uses a fixed
    pair of views of held-out images drawn once up front.
    """
    data = generate_dataset(cfg.dataset_config())
    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    init_rng, loader_rng, aug_rng, val_rng = (np.random.default_rng(s) for s in seeds)
    params = init_params(arch, seed=int(init_rng.integers(2**31)))
    state = OptimizerState(params, cfg.weight_decay)
    res = resolution or cfg.max_resolution
    policy = AugmentationPolicy()
    val_x = data.eval_x[: min(val_batch_size, len(data.eval_x))]
    val_views = [augment_batch(val_x, policy, res, val_rng) for _ in range(2)]
    order, cursor = loader_rng.permutation(len(data.train_x)), 0

    def step(lr):
        nonlocal order, cursor
        if cursor + cfg.batch_size > len(order):
            order, cursor = loader_rng.permutation(len(data.train_x)), 0
        x = data.train_x[order[cursor : cursor + cfg.batch_size]]
        cursor += cfg.batch_size
        vi, vj = (augment_batch(x, policy, res, aug_rng) for _ in range(2))
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                zi, pi, _, ci = forward(params, vi)
                zj, pj, _, cj = forward(params, vj)
                loss, _, dpi, _, dpj = simsiam_loss_grad(zi, pi, zj, pj)
                gi, gj = backward(params, ci, dpi), backward(params, cj, dpj)
                sgd_momentum_step(state, {k: gi[k] + gj[k] for k in gi}, lr, momentum)
                zi, pi, _, _ = forward(params, val_views[0], keep_cache=False)
                zj, pj, _, _ = forward(params, val_views[1], keep_cache=False)
        except FloatingPointError:
            # the range test treats a non-finite loss as the end of the sweep
            return math.nan, math.nan
        return float(loss), float(np.mean(per_sample_loss(zi, pi, zj, pj)))

    return step
