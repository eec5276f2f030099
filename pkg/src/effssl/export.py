"""Schedule CSV, metrics log and cost-report serialization.

Floats are written with 9 significant digits through ``format``, which is
platform independent, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .cost import CostReport
from .progressive import ProgressivePlan, magnitude_at, resolution_at
from .schedules import ScheduleConfig, schedule_point

SCHEDULE_HEADER = ("step", "lr", "momentum", "resolution", "aug_magnitude")


class ExportError(OSError):
    pass


@dataclass(frozen=True)
class ScheduleRow:
    step: int
    lr: float
    momentum: float
    resolution: int
    aug_magnitude: float


def fmt(x) -> str:
    return format(float(x), ".9g")


def schedule_rows(sched: ScheduleConfig, plan: ProgressivePlan) -> list[ScheduleRow]:
    """One row per step ``t = 0..L``."""
    if sched.total_steps != plan.total_steps:
        raise ValueError(
            f"schedule has {sched.total_steps} steps but the curriculum has {plan.total_steps}"
        )
    rows = []
    for t in range(sched.total_steps + 1):
        p = schedule_point(t, sched)
        rows.append(ScheduleRow(t, p.lr, p.momentum, resolution_at(t, plan), magnitude_at(t, plan)))
    return rows


def _open(path, mode="w"):
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror}") from exc


def emit_schedule(sched: ScheduleConfig, plan: ProgressivePlan, out) -> Path:
    out = Path(out)
    rows = schedule_rows(sched, plan)
    with _open(out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        for r in rows:
            w.writerow([r.step, fmt(r.lr), fmt(r.momentum), r.resolution, fmt(r.aug_magnitude)])
    return out


def read_schedule(path) -> list[ScheduleRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SCHEDULE_HEADER:
            raise ValueError(f"unexpected schedule header {header}")
        return [
            ScheduleRow(int(s), float(lr), float(m), int(r), float(a)) for s, lr, m, r, a in reader
        ]


def write_metrics(records, path) -> Path:
    path = Path(path)
    with _open(path) as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    return path


def read_metrics(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_cost_report(report: CostReport, prefix) -> tuple[Path, Path]:
    """Write ``<prefix>.txt`` (table) and ``<prefix>.json`` (record)."""
    prefix = Path(prefix)
    txt, rec = prefix.with_suffix(".txt"), prefix.with_suffix(".json")
    with _open(txt) as fh:
        fh.write(report.to_text() + "\n")
    with _open(rec) as fh:
        fh.write(json.dumps(report.to_record(), indent=2, sort_keys=True) + "\n")
    return txt, rec
