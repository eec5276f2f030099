import json

import pytest

from effssl.cli import run_command, split_overrides
from effssl.config import ConfigError, ExperimentConfig
from effssl.export import read_metrics, read_schedule

TINY = ["--num-classes", "3", "--samples-per-class", "24", "--batch-size", "16",
        "--epochs", "2", "--warmup-epochs", "1", "--knn-k", "3", "--knn-every", "1"]


def test_split_overrides_forms():
    got = split_overrides(["--lr", "0.2", "--hard-augment=false", "--min_resolution", "20"])
    assert got == {"lr": "0.2", "hard_augment": "false", "min_resolution": "20"}
    with pytest.raises(ConfigError, match="unknown option --no-such"):
        split_overrides(["--no-such", "1"])
    with pytest.raises(ConfigError, match="missing value"):
        split_overrides(["--lr"])
    with pytest.raises(ConfigError, match="unexpected argument"):
        split_overrides(["lr"])


def test_overhead_and_pairs(capsys):
    assert run_command(["overhead"]) == 0
    assert "5.16%" in capsys.readouterr().out
    assert run_command(["overhead", "--num-positives", "6"]) == 0
    assert "7.55%" in capsys.readouterr().out
    assert run_command(["pairs", "--num-positives", "4"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "0\t(0, 1)" and "6 pairs" in out


def test_fixed_commands_reject_overrides(capsys):
    with pytest.raises(SystemExit):
        run_command(["pairs", "--lr", "0.1"])


def test_emit_schedule_with_config_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("epochs = 10\nwarmup_epochs = 2\nlr = 0.3\n")
    out = tmp_path / "s.csv"
    assert run_command(["emit-schedule", "--config", str(cfg), "--out", str(out),
                        "--lr", "0.2"]) == 0
    rows = read_schedule(out)
    assert len(rows) == 10 * ExperimentConfig().steps_per_epoch() + 1
    assert max(r.lr for r in rows) == pytest.approx(0.2)


def test_bad_config_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("lr = 0.1\nbeta_low = 0.97\nbeta_high = 0.85\n")
    assert run_command(["emit-schedule", "--config", str(cfg), "--out",
                        str(tmp_path / "x.csv")]) == 1
    err = capsys.readouterr().err
    assert "effssl emit-schedule: error" in err and "line 3" in err
    assert run_command(["emit-schedule", "--out", str(tmp_path / "y.csv"), "--lr", "-1"]) == 1
    assert run_command(["eval", str(tmp_path / "missing")]) == 1


def test_estimate_cost_quadratic(tmp_path, capsys):
    assert run_command(["estimate-cost", "--profile", "quadratic",
                        "--out", str(tmp_path / "cost")]) == 0
    rec = json.loads((tmp_path / "cost.json").read_text())
    assert rec["efficient_flops"] / rec["baseline_flops"] == pytest.approx(1 / 2.37037037, rel=1e-6)
    assert (tmp_path / "cost.txt").read_text() in capsys.readouterr().out


def test_train_then_eval(tmp_path, capsys):
    out = tmp_path / "run"
    assert run_command(["train", "--out", str(out), *TINY]) == 0
    metrics = read_metrics(out / "metrics.jsonl")
    assert [m["epoch"] for m in metrics] == [1, 2]
    capsys.readouterr()
    assert run_command(["eval", str(out / "checkpoint"), *TINY]) == 0
    got = json.loads(capsys.readouterr().out)
    assert got["knn_acc"] == pytest.approx(metrics[-1]["knn_acc"])


def test_experiment_is_reproducible(tmp_path, monkeypatch, capsys):
    for sub in ("a", "b"):
        monkeypatch.setenv("EFFSSL_OUT", str(tmp_path / sub))
        assert run_command(["experiment", "efficient", *TINY]) == 0
    assert "efficient" in capsys.readouterr().out
    for name in ("schedule.csv", "metrics.jsonl", "cost.json", "checkpoint.bin"):
        a = (tmp_path / "a" / "efficient" / "efficient" / name).read_bytes()
        assert a == (tmp_path / "b" / "efficient" / "efficient" / name).read_bytes()
    assert run_command(["experiment", "nope"]) == 1
    assert "unknown preset" in capsys.readouterr().err
