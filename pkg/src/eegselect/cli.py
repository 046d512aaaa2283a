"""Command-line front end.

Subcommands: run, synth, frontier, report, anova, convert-check.
Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .analysis import anova_oneway
from .errors import ConfigError, DataError
from .pipeline import (
    ALGORITHMS,
    accuracy_groups,
    aggregate_report,
    average_frontier,
    execute_run,
    load_config,
    resolve_montage,
)
from .synth import synth_mi_dataset
from .trialfile import read_trialfile, write_trialfile


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="eegselect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run channel selection over subjects/seeds/algorithms")
    run.add_argument("--config", required=True, help="TOML or JSON run configuration")
    run.add_argument("--out", dest="out_dir", help="output directory override")
    run.add_argument("--dataset", dest="datasets", action="append", help="dataset file override")
    run.add_argument("--algorithm", dest="algorithms", action="append", choices=ALGORITHMS)
    run.add_argument("--seed", dest="seeds", action="append", type=int)
    run.add_argument("--montage", help="montage name or CSV path override")
    run.add_argument("--max-channels", dest="max_channels", type=int)
    run.add_argument("--n-candidates", dest="n_candidates", type=int)
    run.add_argument("--test-fraction", dest="test_fraction", type=float)

    synth = sub.add_parser("synth", help="write a synthetic trial file")
    synth.add_argument("--out", required=True)
    synth.add_argument("--montage", default="physionet64")
    synth.add_argument("--channels", default="C3,C4", help="comma-separated signal channels")
    synth.add_argument("--trials", type=int, default=200)
    synth.add_argument("--erd-depth", type=float, default=0.5)
    synth.add_argument("--snr", type=float, default=3.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--fs", type=float, default=160.0)
    synth.add_argument("--duration", type=float, default=4.5)

    frontier = sub.add_parser("frontier", help="average per-subject Pareto solutions")
    frontier.add_argument("--results", required=True, help="run output directory")
    frontier.add_argument("--out", help="output CSV (default: <results>/frontier_avg.csv)")

    report = sub.add_parser("report", help="aggregate accuracies per algorithm")
    report.add_argument("--results", required=True, help="run output directory")
    report.add_argument("--out", help="output CSV (default: <results>/report.csv)")

    anova = sub.add_parser("anova", help="one-way ANOVA across algorithms")
    anova.add_argument("--results", required=True, help="run output directory")
    anova.add_argument("--metric", choices=("sel", "all"), default="sel")

    check = sub.add_parser("convert-check", help="validate a trial file")
    check.add_argument("path")

    return parser


def _cmd_run(args) -> int:
    overrides = {
        k: getattr(args, k)
        for k in ("out_dir", "montage", "max_channels", "n_candidates", "test_fraction")
    }
    for k in ("datasets", "algorithms", "seeds"):
        v = getattr(args, k)
        if v:
            overrides[k] = tuple(v)
    cfg = load_config(args.config, **overrides)
    runs = execute_run(cfg)
    print(f"wrote {len(runs)} run results to {cfg.out_dir}")
    return 0


def _cmd_synth(args) -> int:
    montage = resolve_montage(args.montage)
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    try:
        trials = synth_mi_dataset(
            n_trials=args.trials,
            montage=montage,
            signal_channels=channels,
            erd_depth=args.erd_depth,
            snr=args.snr,
            seed=args.seed,
            fs=args.fs,
            trial_seconds=args.duration,
            activation_window=(0.5, args.duration),
        )
    except KeyError as exc:
        raise ConfigError(f"channel {exc} not in montage {args.montage}") from exc
    write_trialfile(trials, args.out)
    print(f"wrote {trials.n_trials} trials x {trials.n_channels} channels to {args.out}")
    return 0


def _cmd_frontier(args) -> int:
    results_dir = Path(args.results)
    rows = average_frontier(results_dir / "frontiers.csv")
    out = Path(args.out) if args.out else results_dir / "frontier_avg.csv"
    lines = ["algorithm,k,f1,f2"]
    lines += [f"{alg},{k},{f1:.6f},{f2:.6f}" for alg, k, f1, f2 in rows]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_report(args) -> int:
    results_dir = Path(args.results)
    rows = aggregate_report(results_dir / "results.csv")
    out = Path(args.out) if args.out else results_dir / "report.csv"
    lines = ["algorithm,all,sel,pr"]
    lines += [f"{alg},{a:.2f},{s:.2f},{pr:.2f}" for alg, a, s, pr in rows]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def _cmd_anova(args) -> int:
    groups = accuracy_groups(Path(args.results) / "results.csv", args.metric)
    if len(groups) < 2:
        raise DataError("ANOVA needs results from at least 2 algorithms")
    names = sorted(groups)
    try:
        f_stat, p = anova_oneway([groups[n] for n in names])
    except ValueError as exc:
        raise DataError(f"ANOVA not applicable to these results: {exc}") from exc
    print(f"groups: {', '.join(names)}")
    print(f"F={f_stat:.4f} p={p:.6g}")
    return 0


def _cmd_convert_check(args) -> int:
    trials = read_trialfile(args.path)
    problems = []
    if not np.all(np.isfinite(trials.data)):
        problems.append("non-finite samples")
    counts = np.bincount(trials.labels, minlength=2)
    print(
        f"{args.path}: {trials.n_trials} trials x {trials.n_channels} channels x "
        f"{trials.n_samples} samples @ {trials.fs:g} Hz"
    )
    print(
        f"baseline {trials.baseline_window}, activation {trials.activation_window}, "
        f"labels 0/1: {counts[0]}/{counts[1]}"
    )
    if counts.min() == 0:
        print("warning: single-class file")
    if problems:
        raise DataError("; ".join(problems))
    print("ok")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "synth": _cmd_synth,
    "frontier": _cmd_frontier,
    "report": _cmd_report,
    "anova": _cmd_anova,
    "convert-check": _cmd_convert_check,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
