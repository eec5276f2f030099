"""Flat ``key = value`` experiment configuration.

Defaults describe the desk-scale efficient preset: F1-CLR, Super Progressive
resolution 16 -> 32 in steps of 4, magnitude ramp 4 -> 6, and Hard Augment
with 4 candidate views ranked at 8 px.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .hard_augment import SelectionConfig
from .progressive import ProgressivePlan
from .schedules import ScheduleConfig, ScheduleKind
from .sim.data import SynthDatasetConfig


class ConfigError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    # dataset
    num_classes: int = 8
    samples_per_class: int = 250
    canvas_size: int = 48
    image_size: int = 32
    data_noise: float = 0.05
    # optimisation
    batch_size: int = 64
    epochs: int = 120
    schedule: str = "f1clr"
    lr: float = 0.05
    warmup_epochs: int = 20
    phase_fraction: float = 0.3
    momentum: float = 0.9
    beta_low: float = 0.85
    beta_high: float = 0.95
    weight_decay: float = 5e-4
    # curriculum
    min_magnitude: float = 4.0
    max_magnitude: float = 6.0
    min_resolution: int = 16
    max_resolution: int = 32
    resolution_quantum: int = 4
    num_stages: int = 0  # 0: one stage per quantum step
    # hard augment
    hard_augment: bool = True
    num_positives: int = 4
    selection_resolution: int = 8
    # evaluation
    knn_k: int = 20
    knn_every: int = 10

    @property
    def progressive(self):
        return self.min_resolution < self.max_resolution

    @property
    def num_views(self):
        return self.num_positives if self.hard_augment else 2

    @property
    def selects(self):
        # with two candidates there is nothing to choose, so no selection pass runs
        return self.hard_augment and self.num_positives > 2

    def dataset_config(self):
        return SynthDatasetConfig(
            num_classes=self.num_classes,
            samples_per_class=self.samples_per_class,
            canvas_size=self.canvas_size,
            image_size=self.image_size,
            noise_std=self.data_noise,
            seed=self.seed,
        )

    def train_size(self):
        return self.num_classes * int(round(0.8 * self.samples_per_class))

    def steps_per_epoch(self):
        return self.train_size() // self.batch_size

    def schedule_config(self, steps_per_epoch=None):
        spe = steps_per_epoch or self.steps_per_epoch()
        kind = ScheduleKind(self.schedule)
        warm = 0 if kind in (ScheduleKind.COSINE_ANNEALING, ScheduleKind.ONE_CYCLE) else (
            self.warmup_epochs * spe
        )
        return ScheduleConfig(
            kind=kind,
            total_steps=self.epochs * spe,
            lr_max=self.lr,
            warmup_steps=warm,
            phase_fraction=self.phase_fraction,
            beta_low=self.beta_low,
            beta_high=self.beta_high,
            momentum=self.momentum,
        )

    def progressive_plan(self, steps_per_epoch=None):
        spe = steps_per_epoch or self.steps_per_epoch()
        return ProgressivePlan(
            total_steps=self.epochs * spe,
            warmup_steps=self.warmup_epochs * spe if self.progressive else 0,
            res_min=self.min_resolution,
            res_max=self.max_resolution,
            quantum=self.resolution_quantum,
            num_stages=self.num_stages or None,
            mag_min=self.min_magnitude,
            mag_max=self.max_magnitude,
        )

    def selection_config(self):
        if not self.selects:
            return None
        return SelectionConfig(
            num_positives=self.num_positives,
            selection_resolution=self.selection_resolution,
            train_resolution=self.min_resolution,
        )


FIELDS = {f.name: f for f in fields(ExperimentConfig)}

# constraints spanning several keys: (keys, predicate, message)
_CROSS_CHECKS = [
    (("beta_low", "beta_high"), lambda c: c.beta_low <= c.beta_high,
     "beta_low must not exceed beta_high"),
    (("beta_low", "beta_high"), lambda c: 0 <= c.beta_low and c.beta_high < 1,
     "momentum bounds must lie in [0, 1)"),
    (("warmup_epochs", "epochs"), lambda c: 0 <= c.warmup_epochs < c.epochs,
     "warmup_epochs must lie in [0, epochs)"),
    (("schedule", "warmup_epochs"),
     lambda c: c.schedule not in ("f1clr", "cosine_warmup") or c.warmup_epochs >= 1,
     "this schedule needs warmup_epochs >= 1"),
    (("min_resolution", "max_resolution"), lambda c: c.min_resolution <= c.max_resolution,
     "min_resolution must not exceed max_resolution"),
    (("min_resolution", "max_resolution", "resolution_quantum"),
     lambda c: c.resolution_quantum > 0 and c.min_resolution % c.resolution_quantum == 0
     and c.max_resolution % c.resolution_quantum == 0,
     "resolutions must be multiples of resolution_quantum"),
    (("max_resolution", "image_size"), lambda c: c.max_resolution <= c.image_size,
     "max_resolution must not exceed image_size"),
    (("min_resolution",), lambda c: c.min_resolution >= 8, "min_resolution must be >= 8"),
    (("image_size", "canvas_size"), lambda c: c.image_size <= c.canvas_size,
     "image_size must not exceed canvas_size"),
    (("min_magnitude", "max_magnitude"), lambda c: 0 <= c.min_magnitude <= c.max_magnitude,
     "need 0 <= min_magnitude <= max_magnitude"),
    (("num_positives",), lambda c: c.num_positives >= 2, "num_positives must be >= 2"),
    (("selection_resolution", "min_resolution"),
     lambda c: not c.selects or 8 <= c.selection_resolution <= c.min_resolution,
     "selection_resolution must lie in [8, min_resolution]"),
    (("batch_size", "num_classes", "samples_per_class"),
     lambda c: 2 <= c.batch_size <= c.train_size(),
     "batch_size must lie in [2, training set size]"),
    (("knn_k",), lambda c: 1 <= c.knn_k <= c.train_size(), "knn_k out of range"),
    (("epochs",), lambda c: c.epochs >= 1, "epochs must be >= 1"),
    (("lr",), lambda c: c.lr > 0, "lr must be > 0"),
    (("schedule",), lambda c: c.schedule in {k.value for k in ScheduleKind},
     "schedule must be one of " + ", ".join(k.value for k in ScheduleKind)),
]


def validate(cfg: ExperimentConfig, lines=None):
    """Raise ``ConfigError`` on the first violated cross-field constraint."""
    lines = lines or {}
    for keys, ok, msg in _CROSS_CHECKS:
        if not ok(cfg):
            lineno = max((lines.get(k, 0) for k in keys), default=0) or None
            raise ConfigError(f"{msg} ({', '.join(f'{k}={getattr(cfg, k)!r}' for k in keys)})",
                              lineno)
    try:
        cfg.schedule_config()
        cfg.progressive_plan()
        cfg.selection_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _coerce(key, raw):
    typ = FIELDS[key].type
    raw = raw.strip()
    if typ == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if typ == "int":
        return int(raw)
    if typ == "float":
        return float(raw)
    return raw


def apply_overrides(cfg, overrides: dict, lines=None):
    """Set typed values from ``{key: raw_string}``; unknown keys are rejected."""
    values = {}
    for key, raw in overrides.items():
        lineno = (lines or {}).get(key)
        if key not in FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[key] = raw if not isinstance(raw, str) else _coerce(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
    return replace(cfg, **values)


def parse_config(text, base: ExperimentConfig | None = None) -> ExperimentConfig:
    base = base or ExperimentConfig()
    raw, lines = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        raw[key], lines[key] = value, lineno
    cfg = apply_overrides(base, raw, lines)
    return validate(cfg, lines)


def render_config(cfg: ExperimentConfig) -> str:
    out = []
    for name in FIELDS:
        v = getattr(cfg, name)
        out.append(f"{name} = {str(v).lower() if isinstance(v, bool) else repr(v) if isinstance(v, float) else v}")
    return "\n".join(out) + "\n"
