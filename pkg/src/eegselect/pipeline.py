"""Run orchestration: configuration, per-subject preparation, candidate
evaluation and report emission.

A run walks subjects x seeds x algorithms. Per (subject, seed) the trials
are preprocessed once, the objective context is built from the training
partition only, and a feature cache serves every candidate evaluation.
All randomness flows from the configured seeds, so a run directory is a
pure function of (config, input files).
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
import numpy as np

from .analysis import (
    CandidateResult,
    RunResult,
    choose_final_subset_index,
    selection_frequency,
    write_selection_frequency_csv,
    write_topomap_svg,
)
from .classify import (
    DEFAULT_C_GRID,
    SplitSpec,
    make_channel_evaluator,
    split_indices,
    subset_accuracy_cached,
)
from .errors import ConfigError, DataError
from .features import FeatureCache
from .greedy import GreedyTrace, greedy_select
from .montage import Montage, SpatialKernelConfig, builtin_montage, load_montage, relevance_vector
from .objectives import ObjectiveContext, channel_discriminability
from .optimizers import (
    MoeadConfig,
    MopsoConfig,
    Nsga2Config,
    OptimizerResult,
    run_moead,
    run_mopso,
    run_nsga2,
)
from .pareto import ScoredSolution, crowding_distance, nd_sort
from .signal import BandpassConfig, TrialSet, WelchConfig, bandpass, baseline_correct, ittrd_matrix
from .trialfile import read_trialfile

ALGORITHMS = ("nsga2", "mopso", "moead", "greedy")
WORKERS_ENV = "EEGSELECT_WORKERS"

__all__ = [
    "ALGORITHMS",
    "RunConfig",
    "PreparedRun",
    "load_config",
    "resolve_montage",
    "prepare_run",
    "run_algorithm",
    "run_subject",
    "select_candidates",
    "execute_run",
]


@dataclass(frozen=True)
class RunConfig:
    datasets: tuple[str, ...]
    out_dir: str
    montage: str = "physionet64"
    algorithms: tuple[str, ...] = ("nsga2",)
    seeds: tuple[int, ...] = (0,)
    max_channels: int = 16
    sigma: float = 1.0
    baseline_correction: bool = False
    n_candidates: int = 10
    test_fraction: float = 0.2
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    bandpass: BandpassConfig = BandpassConfig()
    welch: WelchConfig = WelchConfig()
    nsga2: Nsga2Config = Nsga2Config()
    mopso: MopsoConfig = MopsoConfig()
    moead: MoeadConfig = MoeadConfig()

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.seeds:
            raise ConfigError("no seeds configured")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms: {', '.join(bad)}")
        if self.max_channels < 1 or self.n_candidates < 1:
            raise ConfigError("max_channels and n_candidates must be >= 1")

    def optimizer_config(self, algorithm: str):
        cfg = {"nsga2": self.nsga2, "mopso": self.mopso, "moead": self.moead}[algorithm]
        return replace(cfg, max_channels=self.max_channels)


_SECTION_TYPES = {
    "bandpass": BandpassConfig,
    "welch": WelchConfig,
    "nsga2": Nsga2Config,
    "mopso": MopsoConfig,
    "moead": MoeadConfig,
}
_LIST_FIELDS = {"datasets", "algorithms", "seeds", "c_grid"}
_TUPLE_SECTION_FIELDS = {"band"}


def _coerce_section(cls, raw: dict):
    if not isinstance(raw, dict):
        raise ConfigError(f"section for {cls.__name__} must be a table")
    known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    kwargs = {
        k: tuple(v) if k in _TUPLE_SECTION_FIELDS else v for k, v in raw.items()
    }
    return cls(**kwargs)


def load_config(path, **overrides) -> RunConfig:
    """Read a TOML or JSON run config; keyword overrides win."""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        raw = json.loads(text)
    else:
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        raw = tomllib.loads(text.decode("utf-8"))
    return build_config(raw, **overrides)


def build_config(raw: dict, **overrides) -> RunConfig:
    raw = dict(raw)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    for key, value in raw.items():
        if key in _SECTION_TYPES:
            kwargs[key] = (
                value if not isinstance(value, dict) else _coerce_section(_SECTION_TYPES[key], value)
            )
        elif key in _LIST_FIELDS:
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    known = {f.name for f in RunConfig.__dataclass_fields__.values()}
    unknown = set(kwargs) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_montage(spec: str) -> Montage:
    if spec in ("physionet64", "bciiv2a22"):
        return builtin_montage(spec)
    return load_montage(spec)


_GENERIC_NAMES_PREFIX = "ch"


def check_montage_match(trials: TrialSet, montage: Montage, context: str) -> None:
    if trials.n_channels != montage.n_channels:
        raise DataError(
            f"{context}: {trials.n_channels} channels but montage has {montage.n_channels}"
        )
    names = trials.channel_names
    if names and not all(n.startswith(_GENERIC_NAMES_PREFIX) and n[2:].isdigit() for n in names):
        if tuple(names) != montage.names:
            raise DataError(f"{context}: channel names do not match the montage order")


@dataclass
class PreparedRun:
    """Everything one (subject, seed) pair needs, shared across algorithms."""

    subject: str
    seed: int
    montage: Montage
    trials: TrialSet
    train_idx: np.ndarray
    test_idx: np.ndarray
    ctx: ObjectiveContext
    cache: FeatureCache


def prepare_run(
    trials_raw: TrialSet, montage: Montage, cfg: RunConfig, seed: int, subject: str
) -> PreparedRun:
    check_montage_match(trials_raw, montage, subject)
    train_idx, test_idx = split_indices(
        trials_raw.labels, SplitSpec(cfg.test_fraction, True, seed)
    )
    trials = trials_raw
    if cfg.baseline_correction:
        window = trials.window_slice(trials.baseline_window)
        reference = trials.data[train_idx][:, :, window].mean(axis=(0, 2))
        trials = baseline_correct(trials, reference)
    trials = bandpass(trials, cfg.bandpass)

    sp = relevance_vector(montage, SpatialKernelConfig(cfg.sigma))
    disc = channel_discriminability(ittrd_matrix(trials.select_trials(train_idx), cfg.welch))
    ctx = ObjectiveContext(sp, disc, cfg.max_channels)
    cache = FeatureCache(trials)
    return PreparedRun(subject, seed, montage, trials, train_idx, test_idx, ctx, cache)


def select_candidates(result: OptimizerResult, k: int) -> list[ScoredSolution]:
    """Up to k candidate solutions: fronts in order, best crowding first,
    duplicate masks dropped."""
    pool: list[ScoredSolution] = []
    seen: set[bytes] = set()
    for s in list(result.front) + list(result.population):
        key = s.mask.tobytes()
        if key not in seen:
            seen.add(key)
            pool.append(s.copy())
    fronts = nd_sort(pool)
    picked: list[ScoredSolution] = []
    for front in fronts:
        members = [pool[i] for i in front]
        crowding_distance(members)
        members.sort(key=lambda s: -s.crowding)
        for s in members:
            picked.append(s)
            if len(picked) == k:
                return picked
    return picked


_OPTIMIZERS = {"nsga2": run_nsga2, "mopso": run_mopso, "moead": run_moead}


@dataclass
class AlgorithmRun:
    result: RunResult
    trace: np.ndarray | None = None
    greedy_trace: GreedyTrace | None = None


def run_algorithm(prep: PreparedRun, algorithm: str, cfg: RunConfig) -> AlgorithmRun:
    if algorithm == "greedy":
        evaluator = make_channel_evaluator(prep.cache, prep.train_idx, seed=prep.seed)
        gtrace = greedy_select(prep.trials, evaluator, cfg.max_channels)
        masks_objs: list[tuple[np.ndarray, tuple[float, float] | None]] = [
            (gtrace.final_subset, None)
        ]
        trace = None
    else:
        opt_result = _OPTIMIZERS[algorithm](prep.ctx, cfg.optimizer_config(algorithm), prep.seed)
        masks_objs = [
            (s.mask, (float(s.obj[0]), float(s.obj[1])))
            for s in select_candidates(opt_result, cfg.n_candidates)
        ]
        trace = opt_result.trace
        gtrace = None

    candidates = []
    for mask, obj in masks_objs:
        acc = subset_accuracy_cached(
            prep.cache, mask, prep.train_idx, prep.test_idx, cfg.c_grid, seed=prep.seed
        )
        candidates.append(
            CandidateResult(mask, acc.all_features, acc.selected_features, obj)
        )
    chosen = choose_final_subset_index(
        [(c.mask, c.acc_sel) for c in candidates], prep.montage.refs
    )
    result = RunResult(prep.subject, algorithm, prep.seed, tuple(candidates), chosen)
    return AlgorithmRun(result, trace, gtrace)


def run_subject(
    trials_raw: TrialSet,
    montage: Montage,
    cfg: RunConfig,
    algorithm: str,
    seed: int,
    subject: str = "subject",
) -> RunResult:
    """Single (subject, algorithm, seed) end to end."""
    prep = prepare_run(trials_raw, montage, cfg, seed, subject)
    return run_algorithm(prep, algorithm, cfg).result


# ---------------------------------------------------------------------------
# Full run + report emission
# ---------------------------------------------------------------------------


def _run_group(args) -> list[AlgorithmRun]:
    path, cfg, seed = args
    trials = read_trialfile(path)
    montage = resolve_montage(cfg.montage)
    prep = prepare_run(trials, montage, cfg, seed, Path(path).stem)
    return [run_algorithm(prep, algorithm, cfg) for algorithm in cfg.algorithms]


def execute_run(cfg: RunConfig) -> list[AlgorithmRun]:
    """All (subject, seed, algorithm) jobs plus report files in out_dir."""
    for path in cfg.datasets:
        if not Path(path).exists():
            raise DataError(f"dataset not found: {path}")
    groups = [(path, cfg, seed) for path in cfg.datasets for seed in cfg.seeds]
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_group = list(pool.map(_run_group, groups))
    else:
        per_group = [_run_group(g) for g in groups]
    runs = [run for group in per_group for run in group]
    write_reports(runs, cfg)
    return runs


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _write_csv(path: Path, header: str, rows: list[str]) -> None:
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")


def write_reports(runs: list[AlgorithmRun], cfg: RunConfig) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    montage = resolve_montage(cfg.montage)

    rows = [
        f"{r.result.subject},{r.result.algorithm},{_fmt(r.result.chosen.acc_all)},"
        f"{_fmt(r.result.chosen.acc_sel)},{r.result.pr}"
        for r in runs
    ]
    _write_csv(out / "results.csv", "subject,algorithm,acc_all,acc_sel,pr", rows)

    frontier_rows = []
    for r in runs:
        ordered = sorted(
            (c for c in r.result.candidates if c.objectives is not None),
            key=lambda c: c.objectives[0],
        )
        if not ordered:
            continue
        while len(ordered) < cfg.n_candidates:
            ordered.append(ordered[-1])  # pad by repeating the last solution
        for k, c in enumerate(ordered[: cfg.n_candidates], start=1):
            frontier_rows.append(
                f"{r.result.subject},{r.result.algorithm},{k},"
                f"{_fmt(c.objectives[0])},{_fmt(c.objectives[1])}"
            )
    _write_csv(out / "frontiers.csv", "subject,algorithm,k,f1,f2", frontier_rows)

    chosen_rows = []
    for r in runs:
        names = [montage.names[i] for i in np.flatnonzero(r.result.chosen.mask)]
        chosen_rows.append(
            f"{r.result.subject},{r.result.algorithm},{r.result.seed},"
            f"{r.result.pr},{'|'.join(names)}"
        )
    _write_csv(out / "chosen_subsets.csv", "subject,algorithm,seed,n_channels,channels", chosen_rows)

    for r in runs:
        tag = f"{r.result.subject}_{r.result.algorithm}_s{r.result.seed}"
        if r.trace is not None:
            trace_rows = [
                f"{int(row[0])},{_fmt(row[1])},{_fmt(row[2])},{_fmt(row[3])},{_fmt(row[4])}"
                for row in r.trace
            ]
            _write_csv(
                out / f"trace_{tag}.csv",
                "generation,best_f1,best_f2,mean_f1,mean_f2",
                trace_rows,
            )
        if r.greedy_trace is not None:
            step_rows = [
                f"{i},{s.channel},{_fmt(s.accuracy)}"
                for i, s in enumerate(r.greedy_trace.steps, start=1)
            ]
            _write_csv(out / f"greedy_trace_{tag}.csv", "step,channel,accuracy", step_rows)

    for algorithm in cfg.algorithms:
        alg_runs = [r.result for r in runs if r.result.algorithm == algorithm]
        if not alg_runs:
            continue
        counts = selection_frequency(alg_runs, montage)
        write_selection_frequency_csv(counts, montage, out / f"selection_frequency_{algorithm}.csv")
        write_topomap_svg(counts, montage, out / f"topomap_{algorithm}.svg")


def aggregate_report(results_csv: Path) -> list[tuple[str, float, float, float]]:
    """Per-algorithm (mean acc_all %, mean acc_sel %, mean PR) rows."""
    by_alg: dict[str, list[tuple[float, float, int]]] = {}
    lines = Path(results_csv).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != "subject,algorithm,acc_all,acc_sel,pr":
        raise DataError(f"{results_csv}: not a results file")
    for line in lines[1:]:
        subject, algorithm, acc_all, acc_sel, pr = line.split(",")
        by_alg.setdefault(algorithm, []).append((float(acc_all), float(acc_sel), int(pr)))
    out = []
    for algorithm in sorted(by_alg):
        vals = np.array(by_alg[algorithm])
        out.append(
            (
                algorithm,
                float(vals[:, 0].mean() * 100.0),
                float(vals[:, 1].mean() * 100.0),
                float(vals[:, 2].mean()),
            )
        )
    return out


def average_frontier(frontiers_csv: Path) -> list[tuple[str, int, float, float]]:
    """Mean k-th solution across subjects per algorithm."""
    acc: dict[tuple[str, int], list[tuple[float, float]]] = {}
    lines = Path(frontiers_csv).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != "subject,algorithm,k,f1,f2":
        raise DataError(f"{frontiers_csv}: not a frontier file")
    for line in lines[1:]:
        _, algorithm, k, f1, f2 = line.split(",")
        acc.setdefault((algorithm, int(k)), []).append((float(f1), float(f2)))
    out = []
    for (algorithm, k) in sorted(acc):
        vals = np.array(acc[(algorithm, k)])
        out.append((algorithm, k, float(vals[:, 0].mean()), float(vals[:, 1].mean())))
    return out


def accuracy_groups(results_csv: Path, metric: str = "sel") -> dict[str, list[float]]:
    col = {"all": 2, "sel": 3}[metric]
    groups: dict[str, list[float]] = {}
    lines = Path(results_csv).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != "subject,algorithm,acc_all,acc_sel,pr":
        raise DataError(f"{results_csv}: not a results file")
    for line in lines[1:]:
        parts = line.split(",")
        groups.setdefault(parts[1], []).append(float(parts[col]))
    return groups
