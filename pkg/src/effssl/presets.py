"""Named desk-scale experiments and the runner that writes their artifacts.

Scale mapping from the full-size setups: 800/480 epochs -> 200/120,
resolutions 224/96/64 -> 32/16/8, batch 128 -> 64.
"""
from __future__ import annotations

import json
import logging
from dataclasses import replace
from pathlib import Path

from .config import ExperimentConfig, render_config, validate
from .cost import TrainingPlan, compare
from .export import emit_schedule, write_cost_report
from .progressive import resolution_sequence
from .sim.model import Architecture, init_params
from .sim.train import measured_profile, train

log = logging.getLogger(__name__)

BASELINE = dict(
    schedule="cosine", lr=0.05, epochs=200, warmup_epochs=0, momentum=0.9,
    min_resolution=32, max_resolution=32, min_magnitude=5.0, max_magnitude=5.0,
    hard_augment=False,
)
EFFICIENT = dict(
    schedule="f1clr", lr=0.1, epochs=120, warmup_epochs=20,
    min_resolution=16, max_resolution=32, min_magnitude=4.0, max_magnitude=6.0,
    hard_augment=True, num_positives=4, selection_resolution=8,
)
# strategy toggles on top of the efficient run
_NO_PROGRESSIVE = dict(min_resolution=32, min_magnitude=5.0, max_magnitude=5.0)
_NO_HARD = dict(hard_augment=False)


def baseline(**overrides) -> ExperimentConfig:
    return validate(replace(ExperimentConfig(), **{**BASELINE, **overrides}))


def efficient(**overrides) -> ExperimentConfig:
    return validate(replace(ExperimentConfig(), **{**EFFICIENT, **overrides}))


def _ablation(o):
    return [
        ("ca", baseline(**o)),
        ("f1clr", efficient(**{**_NO_PROGRESSIVE, **_NO_HARD, **o})),
        ("ca+hard", baseline(**{"epochs": EFFICIENT["epochs"], "hard_augment": True,
                                "num_positives": 4, **o})),
        ("f1clr+prog", efficient(**{**_NO_HARD, **o})),
        ("f1clr+hard", efficient(**{**_NO_PROGRESSIVE, **o})),
        ("f1clr+prog+hard", efficient(**o)),
    ]


def _aug_res_grid(o):
    runs = []
    for res in (16, 24, 32):
        for mag in (3.0, 5.0, 7.0, 10.0, 15.0):
            cfg = baseline(**{"epochs": 50, "min_resolution": res, "max_resolution": res,
                              "resolution_quantum": 8 if res % 8 == 0 else 4,
                              "min_magnitude": mag, "max_magnitude": mag, **o})
            runs.append((f"r{res}-m{mag:g}", cfg))
    return runs


def _curriculum_bounds(o):
    bounds = [(5.0, 5.0), (2.5, 4.0), (3.0, 4.0), (4.0, 5.0), (5.0, 6.0), (4.0, 6.0)]
    return [
        (f"m{lo:g}-{hi:g}", efficient(**{"epochs": 80, "min_resolution": 20,
                                        "min_magnitude": lo, "max_magnitude": hi,
                                        **_NO_HARD, **o}))
        for lo, hi in bounds
    ]


def _f1clr_lengths(o):
    runs = []
    for epochs in (40, 50, 60, 70, 80, 90, 100):
        runs.append((f"ca-{epochs}", baseline(**{"epochs": epochs, **o})))
        runs.append((f"f1clr-{epochs}", efficient(**{"epochs": epochs, **_NO_PROGRESSIVE,
                                                      **_NO_HARD, **o})))
    return runs


PRESETS = {
    "baseline": lambda o: [("baseline", baseline(**o))],
    "efficient": lambda o: [("efficient", efficient(**o))],
    "ablation-components": _ablation,
    "aug-res-grid": _aug_res_grid,
    "curriculum-bounds": _curriculum_bounds,
    "f1clr-lengths": _f1clr_lengths,
}


def preset_runs(name, **overrides) -> list[tuple[str, ExperimentConfig]]:
    try:
        build = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return build(overrides)


def nominal_plan(cfg: ExperimentConfig) -> TrainingPlan:
    """Resolution plan the trainer will realise for ``cfg``."""
    seq = resolution_sequence(cfg.progressive_plan())
    return TrainingPlan(seq, cfg.selection_config(), cfg.batch_size)


def cost_against_baseline(cfg, reference: ExperimentConfig, arch=Architecture()):
    plans = nominal_plan(reference), nominal_plan(cfg)
    res = set(plans[0].resolutions.tolist()) | set(plans[1].resolutions.tolist())
    if cfg.selects:
        res.add(cfg.selection_resolution)
    profile = measured_profile(init_params(arch), res)
    return compare(*plans, profile)


def run_preset(name, out_root, arch=Architecture(), **overrides):
    """Train every run of a preset under ``out_root/name/<run>``; returns the summary."""
    root = Path(out_root) / name
    root.mkdir(parents=True, exist_ok=True)
    reference = baseline(**{k: v for k, v in overrides.items() if k == "seed"})
    summary = []
    for run_name, cfg in preset_runs(name, **overrides):
        out = root / run_name
        out.mkdir(parents=True, exist_ok=True)
        emit_schedule(cfg.schedule_config(), cfg.progressive_plan(), out / "schedule.csv")
        result = train(cfg, out, arch)
        report = cost_against_baseline(cfg, reference, arch)
        write_cost_report(report, out / "cost")
        summary.append({
            "run": run_name,
            "knn_acc": result.final["knn_acc"],
            "total_flops": result.total_flops,
            "flops_vs_baseline": report.flops_fraction,
        })
        log.info("%s/%s knn %.4f flops %.3g", name, run_name, result.final["knn_acc"],
                 result.total_flops)
    (root / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (root / "overrides.txt").write_text(
        render_config(replace(ExperimentConfig(), **{k: v for k, v in overrides.items()}))
    )
    return summary
