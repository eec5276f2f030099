"""Command-line entry point.

Any config key can be overridden with ``--key value`` (dashes or
underscores); overrides win over ``--config`` file values. Experiment output
goes under ``$EFFSSL_OUT`` (default ``runs``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import FIELDS, ConfigError, ExperimentConfig, apply_overrides, parse_config, validate
from .cost import TrainingPlan, compare
from .export import emit_schedule, write_cost_report
from .hard_augment import SelectionConfig, enumerate_pairs, selection_overhead
from .lr_finder import RangeTestConfig, run_range_test

OUT_ENV = "EFFSSL_OUT"


def output_root():
    return Path(os.environ.get(OUT_ENV, "runs"))


def split_overrides(tokens):
    """``['--lr', '0.2', '--hard-augment=false']`` -> ``{'lr': '0.2', 'hard_augment': 'false'}``."""
    out, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            value, i = tokens[i + 1], i + 2
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigError(f"unknown option --{key.replace('_', '-')}")
        out[key] = value
    return out


def load_config(path, overrides, base=None) -> ExperimentConfig:
    base = base or ExperimentConfig()
    cfg = parse_config(Path(path).read_text(), base) if path else base
    return validate(apply_overrides(cfg, overrides))


def cmd_emit_schedule(args, overrides):
    cfg = load_config(args.config, overrides)
    out = emit_schedule(cfg.schedule_config(), cfg.progressive_plan(), args.out)
    print(f"wrote {cfg.schedule_config().total_steps + 1} rows to {out}")


def cmd_estimate_cost(args, overrides):
    from .presets import baseline, cost_against_baseline

    cfg = load_config(args.config, overrides)
    if args.profile == "quadratic":
        from .cost import FlopsProfile
        from .presets import nominal_plan

        report = compare(nominal_plan(baseline(seed=cfg.seed)), nominal_plan(cfg),
                         FlopsProfile.quadratic(1))
    else:
        report = cost_against_baseline(cfg, baseline(seed=cfg.seed))
    print(report.to_text())
    if args.out:
        txt, rec = write_cost_report(report, args.out)
        print(f"wrote {txt} and {rec}")


def cmd_overhead(args, overrides):
    cfg = SelectionConfig(args.num_positives, args.sel_res, args.res, args.cost_ratio)
    kept, overhead = selection_overhead(cfg)
    rows = [
        ("train resolution r", f"{args.res}"),
        ("selection resolution r_sel", f"{args.sel_res}"),
        ("positives m", f"{args.num_positives}"),
        ("iteration cost ratio C", f"{args.cost_ratio:g}"),
        ("training share r^2 C", f"{args.res**2 * args.cost_ratio:g}"),
        ("selection share m r_sel^2", f"{args.num_positives * args.sel_res**2:g}"),
        ("kept fraction", f"{kept:.4f}"),
        ("overhead", f"{100 * overhead:.2f}%"),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")


def cmd_pairs(args, overrides):
    pairs = enumerate_pairs(args.num_positives)
    for k, (i, j) in enumerate(pairs):
        print(f"{k}\t({i}, {j})")
    print(f"{len(pairs)} pairs")


def cmd_lr_find(args, overrides):
    from .sim.train import range_test_trainer

    cfg = load_config(args.config, overrides)
    # the SimSiam loss is bounded below by -1
    rt = RangeTestConfig(args.lr_lo, args.lr_hi, args.steps, args.val_batch_size, loss_floor=-1.0)
    result = run_range_test(range_test_trainer(cfg, rt.val_batch_size), rt)
    flag = "" if result.min_detected else " (not detected; lower bound)"
    print(f"min_lr {result.min_lr:.6g}{flag}")
    print(f"max_lr {result.max_lr:.6g}{' (divergence)' if result.diverged else ' (plateau end)'}")
    if args.out:
        result.write_csv(args.out)
        print(f"wrote trace to {args.out}")


def cmd_train(args, overrides):
    from .sim.train import train

    cfg = load_config(args.config, overrides)
    out = Path(args.out) if args.out else output_root() / "train"
    out.mkdir(parents=True, exist_ok=True)
    emit_schedule(cfg.schedule_config(), cfg.progressive_plan(), out / "schedule.csv")
    result = train(cfg, out)
    print(f"final kNN accuracy {result.final['knn_acc']:.4f}, "
          f"{result.total_flops:.6g} FLOPs; outputs in {out}")


def cmd_eval(args, overrides):
    from .sim.checkpoint import load_checkpoint
    from .sim.data import generate_dataset
    from .sim.model import architecture_of
    from .sim.train import evaluate

    cfg = load_config(args.config, overrides)
    params = load_checkpoint(args.checkpoint)
    architecture_of(params)  # rejects incomplete checkpoints early
    acc, std = evaluate(params, generate_dataset(cfg.dataset_config()), cfg.knn_k)
    print(json.dumps({"knn_acc": acc, "embedding_std": std}))


def cmd_experiment(args, overrides):
    from .presets import run_preset

    typed = {k: getattr(apply_overrides(ExperimentConfig(), {k: v}), k) for k, v in overrides.items()}
    summary = run_preset(args.name, output_root(), **typed)
    for row in summary:
        print(f"{row['run']:<20} knn {row['knn_acc']:.4f}  "
              f"FLOPs {100 * row['flops_vs_baseline']:.1f}% of baseline")


def build_parser():
    p = argparse.ArgumentParser(prog="effssl", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("emit-schedule", help="write the per-step schedule CSV")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_emit_schedule)

    s = sub.add_parser("estimate-cost", help="FLOPs of a config against the baseline preset")
    s.add_argument("--config")
    s.add_argument("--profile", choices=("measured", "quadratic"), default="measured")
    s.add_argument("--out", help="prefix for .txt and .json reports")
    s.set_defaults(func=cmd_estimate_cost)

    s = sub.add_parser("overhead", help="selection-pass overhead of Hard Augment")
    s.add_argument("--res", type=int, default=224)
    s.add_argument("--sel-res", type=int, default=64)
    s.add_argument("--num-positives", type=int, default=4)
    s.add_argument("--cost-ratio", type=float, default=6.0)
    s.set_defaults(func=cmd_overhead)

    s = sub.add_parser("pairs", help="list augmentation pairs")
    s.add_argument("--num-positives", type=int, default=4)
    s.set_defaults(func=cmd_pairs)

    s = sub.add_parser("lr-find", help="learning-rate range test on the simulator")
    s.add_argument("--config")
    s.add_argument("--lr-lo", type=float, default=1e-3)
    s.add_argument("--lr-hi", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=200)
    s.add_argument("--val-batch-size", type=int, default=256)
    s.add_argument("--out")
    s.set_defaults(func=cmd_lr_find)

    s = sub.add_parser("train", help="train one configuration")
    s.add_argument("--config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="kNN accuracy of a checkpoint")
    s.add_argument("checkpoint", help="checkpoint prefix (without .manifest/.bin)")
    s.add_argument("--config")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("experiment", help="run a named preset")
    s.add_argument("name")
    s.set_defaults(func=cmd_experiment)
    return p


# subcommands whose options are all fixed; the rest accept config overrides
_NO_OVERRIDES = {"overhead", "pairs"}


def run_command(argv=None) -> int:
    parser = build_parser()
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if rest and args.command in _NO_OVERRIDES:
            parser.error(f"unrecognized arguments: {' '.join(rest)}")
        args.func(args, split_overrides(rest))
    except (ValueError, KeyError, OSError, RuntimeError, ArithmeticError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"effssl {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
