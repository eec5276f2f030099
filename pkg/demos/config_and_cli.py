"""Configs, overrides and exported files, driven through the CLI entry point.

Writes into a temporary directory and cleans up after itself.
"""
import os
import tempfile
from pathlib import Path

from effssl.cli import run_command
from effssl.config import parse_config, render_config
from effssl.export import read_metrics, read_schedule

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg_file = tmp / "short.cfg"
    cfg_file.write_text(
        "# a tiny efficient-style run\n"
        "num_classes = 4\nsamples_per_class = 40\nepochs = 6\nwarmup_epochs = 1\n"
        "knn_every = 3\n"
    )
    cfg = parse_config(cfg_file.read_text())
    print("parsed config (non-default keys shown in the file):")
    print("\n".join(l for l in render_config(cfg).splitlines() if l.split(" =")[0] in
                    ("num_classes", "samples_per_class", "epochs", "warmup_epochs", "lr")))

    # flags beat the file
    run_command(["emit-schedule", "--config", str(cfg_file), "--out", str(tmp / "s.csv"),
                 "--lr", "0.08"])
    rows = read_schedule(tmp / "s.csv")
    print(f"first rows: {rows[:2]}\npeak lr {max(r.lr for r in rows)}")

    run_command(["overhead", "--num-positives", "6"])

    # a config error names the line
    bad = tmp / "bad.cfg"
    bad.write_text("lr = 0.1\nbeta_low = 0.97\nbeta_high = 0.85\n")
    status = run_command(["emit-schedule", "--config", str(bad), "--out", str(tmp / "x.csv")])
    print(f"exit status {status}")

    os.environ["EFFSSL_OUT"] = str(tmp / "runs")
    # presets take overrides as flags
    run_command(["experiment", "efficient", "--num-classes", "4", "--samples-per-class", "40",
                 "--epochs", "6", "--warmup-epochs", "1", "--knn-every", "3"])
    run_dir = tmp / "runs" / "efficient" / "efficient"
    print("files:", sorted(p.name for p in run_dir.iterdir()))
    print("last metrics record:", read_metrics(run_dir / "metrics.jsonl")[-1])
