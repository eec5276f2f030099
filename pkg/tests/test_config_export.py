import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from effssl.config import ConfigError, ExperimentConfig, parse_config, render_config, validate
from effssl.export import (
    SCHEDULE_HEADER,
    emit_schedule,
    read_metrics,
    read_schedule,
    schedule_rows,
    write_cost_report,
    write_metrics,
    ExportError,
)
from effssl.cost import FlopsProfile, TrainingPlan, compare
from effssl.progressive import ProgressivePlan, magnitude_at, resolution_at
from effssl.schedules import ScheduleConfig, ScheduleKind, schedule_point


def test_empty_file_gives_defaults():
    assert parse_config("") == ExperimentConfig()
    assert parse_config("# only a comment\n\n") == ExperimentConfig()


def test_warmup_and_length():
    cfg = parse_config("epochs = 480\nwarmup_epochs = 80\nlr = 0.2\n")
    sc = cfg.schedule_config(10)
    assert sc.kind is ScheduleKind.FIXED_ONE_CYCLE
    assert (sc.total_steps, sc.warmup_steps, sc.lr_max) == (4800, 800, 0.2)


def test_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("lr = 0.1\nbeta_low = 0.97\nbeta_high = 0.85\n")
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("lr = 0.1\n\nbogus = 1\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("epochs = many\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("lr = 0.1\nlr = 0.2\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just words\n")


def test_beta_ordering_reports_later_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("beta_low = 0.97\nbeta_high = 0.85\n")
    assert exc.value.lineno == 2


def test_booleans_and_comments():
    cfg = parse_config("hard_augment = no   # two-view training\nnum_positives = 2\n")
    assert cfg.hard_augment is False and cfg.num_positives == 2


@given(
    st.integers(0, 10**6), st.floats(1e-4, 1.0), st.sampled_from(["cosine", "f1clr", "one_cycle",
                                                                 "cosine_warmup"]),
    st.booleans(), st.floats(0.0, 5.0),
)
def test_render_roundtrip(seed, lr, schedule, hard, mag):
    cfg = validate(ExperimentConfig(seed=seed, lr=lr, schedule=schedule, hard_augment=hard,
                                    min_magnitude=mag, max_magnitude=mag + 1))
    assert parse_config(render_config(cfg)) == cfg


def _sched_pair(L=10):
    return (ScheduleConfig(ScheduleKind.FIXED_ONE_CYCLE, L, 0.2, warmup_steps=3),
            ProgressivePlan(L, 3, 16, 32, 4, mag_min=4, mag_max=6))


def test_cosine_schedule_csv(tmp_path):
    sc = ScheduleConfig(ScheduleKind.COSINE_ANNEALING, 10, 0.1)
    rows = schedule_rows(sc, ProgressivePlan.constant(10, 32))
    emit_schedule(sc, ProgressivePlan.constant(10, 32), tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == ",".join(SCHEDULE_HEADER)
    assert len(lines) == 12
    assert lines[1].split(",")[1] == "0.1" and lines[-1].split(",")[1] == "0"
    assert rows[0].lr == 0.1


def test_schedule_csv_fidelity(tmp_path):
    sc, plan = _sched_pair(37)
    path = emit_schedule(sc, plan, tmp_path / "s.csv")
    rows = read_schedule(path)
    assert [r.step for r in rows] == list(range(38))
    for r in rows:
        p = schedule_point(r.step, sc)
        assert r.lr == pytest.approx(p.lr, rel=5e-9, abs=1e-300)
        assert r.momentum == pytest.approx(p.momentum, rel=5e-9)
        assert r.resolution == resolution_at(r.step, plan)
        assert r.aug_magnitude == pytest.approx(magnitude_at(r.step, plan), rel=5e-9)
    peak = rows[3]
    assert (peak.lr, peak.momentum) == (0.2, 0.85)


def test_schedule_csv_bytes_stable(tmp_path):
    sc, plan = _sched_pair()
    a = emit_schedule(sc, plan, tmp_path / "a.csv").read_bytes()
    b = emit_schedule(sc, plan, tmp_path / "b.csv").read_bytes()
    assert a == b and b"\r" not in a


def test_length_mismatch_and_unwritable(tmp_path):
    sc, plan = _sched_pair()
    with pytest.raises(ValueError):
        schedule_rows(sc, ProgressivePlan.constant(11, 32))
    with pytest.raises(ExportError):
        emit_schedule(sc, plan, tmp_path / "missing" / "s.csv")


def test_metrics_and_report(tmp_path):
    recs = [{"epoch": 1, "knn_acc": None}, {"epoch": 2, "knn_acc": 0.5}]
    assert read_metrics(write_metrics(recs, tmp_path / "m.jsonl")) == recs
    rep = compare(TrainingPlan.constant(4, 2), TrainingPlan.constant(2, 1), FlopsProfile({1: 1, 2: 4}))
    txt, rec = write_cost_report(rep, tmp_path / "cost")
    assert "combined speedup" in txt.read_text()
    assert '"combined_speedup": 8.0' in rec.read_text()
