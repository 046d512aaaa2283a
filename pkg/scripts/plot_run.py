#!/usr/bin/env python3
"""Plot convergence traces and averaged Pareto fronts from a run directory.

Reads the trace_*.csv and frontier_avg.csv files emitted by `eegselect run`
(+ `eegselect frontier`) and writes PNG figures next to them. Requires
matplotlib.

Usage:
    python scripts/plot_run.py --results runs/bench/results
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_csv(path):
    rows = path.read_text().strip().splitlines()
    return rows[0].split(","), [r.split(",") for r in rows[1:]]


def plot_traces(results: Path) -> None:
    traces = sorted(results.glob("trace_*.csv"))
    if not traces:
        print("no trace files found")
        return
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for path in traces:
        _, rows = load_csv(path)
        gen = np.array([float(r[0]) for r in rows])
        best_f1 = np.array([float(r[1]) for r in rows])
        best_f2 = np.array([float(r[2]) for r in rows])
        label = path.stem.replace("trace_", "")
        axes[0].plot(gen, best_f1, lw=0.9, label=label)
        axes[1].plot(gen, best_f2, lw=0.9, label=label)
    axes[0].set_ylabel("best spatial objective (min)")
    axes[1].set_ylabel("best desync objective (min)")
    for ax in axes:
        ax.set_xlabel("generation")
    axes[0].legend(fontsize=6)
    fig.tight_layout()
    out = results / "convergence.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def plot_frontier(results: Path) -> None:
    path = results / "frontier_avg.csv"
    if not path.exists():
        print("frontier_avg.csv missing; run `eegselect frontier` first")
        return
    _, rows = load_csv(path)
    by_alg = defaultdict(list)
    for algorithm, _, f1, f2 in rows:
        by_alg[algorithm].append((float(f1), float(f2)))
    fig, ax = plt.subplots(figsize=(5, 4))
    for algorithm, pts in sorted(by_alg.items()):
        pts = sorted(pts)
        ax.plot(*zip(*pts), "o-", ms=4, label=algorithm)
    ax.set_xlabel("f1 (negated spatial relevance)")
    ax.set_ylabel("f2 (negated desynchronisation)")
    ax.legend()
    fig.tight_layout()
    out = results / "frontier.png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--results", required=True)
    args = parser.parse_args()
    results = Path(args.results)
    plot_traces(results)
    plot_frontier(results)
    return 0


if __name__ == "__main__":
    sys.exit(main())
