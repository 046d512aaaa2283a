"""NSGA-II, MOPSO and MOEA/D over binary channel masks.

All three searches share the variation operators (single-point crossover,
per-bit flip mutation) and the cardinality repair from the objectives
module, and are pure functions of (context, config, seed): same inputs,
bit-identical outputs. Every emitted mask satisfies 1 <= popcount <= L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .objectives import ObjectiveContext, evaluate, random_mask, repair
from .pareto import (
    GridConfig,
    ParetoArchive,
    ScoredSolution,
    archive_insert,
    crowding_distance,
    dominates,
    grid_cells,
    nd_sort,
)

__all__ = [
    "Nsga2Config",
    "MopsoConfig",
    "MoeadConfig",
    "SwarmState",
    "OptimizerResult",
    "single_point_crossover",
    "bit_flip_mutation",
    "binary_tournament",
    "tchebycheff",
    "run_nsga2",
    "run_mopso",
    "run_moead",
]

VELOCITY_CLAMP = 6.0


@dataclass(frozen=True)
class Nsga2Config:
    pop_size: int = 10
    generations: int = 1000
    p_c: float = 0.7
    p_m: float = 0.1
    max_channels: int = 16
    per_individual_mutation: bool = False

    def __post_init__(self):
        if self.pop_size < 4 or self.pop_size % 2:
            raise ConfigError("pop_size must be even and >= 4")
        if not (0 <= self.p_c <= 1 and 0 <= self.p_m <= 1):
            raise ConfigError("p_c and p_m must lie in [0, 1]")
        if self.generations < 1 or self.max_channels < 1:
            raise ConfigError("generations and max_channels must be >= 1")


@dataclass(frozen=True)
class MopsoConfig:
    swarm_size: int = 10
    iterations: int = 100
    inertia: float = 0.5
    c1: float = 2.0
    c2: float = 2.0
    repository_capacity: int = 100
    grid_divisions: int = 10
    p_m: float = 0.1
    max_channels: int = 16
    per_individual_mutation: bool = False

    def __post_init__(self):
        if not 0 < self.inertia <= 1:
            raise ConfigError("inertia must lie in (0, 1]")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError("acceleration coefficients must be >= 0")
        if self.swarm_size < 1 or self.iterations < 1:
            raise ConfigError("swarm_size and iterations must be >= 1")
        if self.repository_capacity < 1 or self.grid_divisions < 1:
            raise ConfigError("repository capacity and grid divisions must be >= 1")
        if not 0 <= self.p_m <= 1:
            raise ConfigError("p_m must lie in [0, 1]")
        if self.max_channels < 1:
            raise ConfigError("max_channels must be >= 1")


@dataclass(frozen=True)
class MoeadConfig:
    subproblems: int = 19
    neighborhood: int = 10
    generations: int = 1000
    p_c: float = 0.7
    p_m: float = 0.1
    delta: float = 0.7
    max_channels: int = 16
    per_individual_mutation: bool = False

    def __post_init__(self):
        if self.subproblems < 2:
            raise ConfigError("need at least 2 subproblems")
        if not 2 <= self.neighborhood <= self.subproblems:
            raise ConfigError("neighborhood must lie in [2, subproblems]")
        if not (0 <= self.p_c <= 1 and 0 <= self.p_m <= 1 and 0 <= self.delta <= 1):
            raise ConfigError("p_c, p_m and delta must lie in [0, 1]")
        if self.generations < 1 or self.max_channels < 1:
            raise ConfigError("generations and max_channels must be >= 1")


@dataclass
class SwarmState:
    """Positions, velocities, personal bests and the shared repository."""

    pos: list[ScoredSolution]
    vel: np.ndarray
    pbest: list[ScoredSolution]
    rep: ParetoArchive


@dataclass
class OptimizerResult:
    """Outcome of one optimizer run.

    front holds the non-dominated candidate set, population the full final
    state (population / swarm positions / subproblem solutions), and trace
    one row per generation: (generation, best_f1, best_f2, mean_f1,
    mean_f2) in minimization space.
    """

    front: list[ScoredSolution]
    population: list[ScoredSolution]
    trace: np.ndarray
    ideal_trace: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Variation operators
# ---------------------------------------------------------------------------


def single_point_crossover(
    p1: np.ndarray, p2: np.ndarray, p_c: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """With probability p_c cut at a uniform point in [1, N-1] and swap
    tails; otherwise return copies of the parents. May leave children over
    the cardinality bound; callers repair."""
    if p1.shape != p2.shape:
        raise ValueError("parents must have equal length")
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() < p_c:
        cut = int(rng.integers(1, p1.size))
        c1[cut:], c2[cut:] = p2[cut:], p1[cut:]
    return c1, c2


def bit_flip_mutation(
    mask: np.ndarray,
    p_m: float,
    rng: np.random.Generator,
    per_individual: bool = False,
) -> np.ndarray:
    """Flip each bit independently with probability p_m.

    The per-individual variant instead flips a single uniformly chosen bit
    with probability p_m. Repair is the caller's job.
    """
    if per_individual:
        out = mask.copy()
        if rng.random() < p_m:
            i = int(rng.integers(mask.size))
            out[i] = ~out[i]
        return out
    flips = rng.random(mask.size) < p_m
    return mask ^ flips


def binary_tournament(pop: list[ScoredSolution], rng: np.random.Generator) -> ScoredSolution:
    """Sample two solutions uniformly; lower rank wins, ties go to higher
    crowding distance, then to the first sampled."""
    if not pop:
        raise ValueError("empty population")
    i, j = rng.integers(len(pop), size=2)
    a, b = pop[i], pop[j]
    if b.rank < a.rank or (b.rank == a.rank and b.crowding > a.crowding):
        return b
    return a


def tchebycheff(obj: np.ndarray, lam: np.ndarray, z_star: np.ndarray) -> float:
    """Weighted Tchebycheff scalarization max_j lam_j * |obj_j - z*_j|."""
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be non-negative and sum to 1")
    return float(np.max(lam * np.abs(np.asarray(obj) - np.asarray(z_star))))


# ---------------------------------------------------------------------------
# NSGA-II
# ---------------------------------------------------------------------------


def _scored(mask: np.ndarray, ctx: ObjectiveContext) -> ScoredSolution:
    return ScoredSolution(mask, evaluate(mask, ctx))


def _trace_row(generation: int, pop: list[ScoredSolution]) -> list[float]:
    objs = np.stack([s.obj for s in pop])
    return [float(generation), *objs.min(axis=0), *objs.mean(axis=0)]


def _rank_and_crowd(pop: list[ScoredSolution]) -> list[list[int]]:
    fronts = nd_sort(pop)
    for front in fronts:
        crowding_distance([pop[i] for i in front])
    return fronts


def run_nsga2(ctx: ObjectiveContext, cfg: Nsga2Config, seed: int) -> OptimizerResult:
    """Elitist non-dominated-sorting GA; returns the final population and
    its first front."""
    if cfg.max_channels > ctx.n_channels:
        raise ConfigError("max_channels exceeds the number of channels")
    rng = np.random.default_rng(seed)
    pop = [
        _scored(random_mask(ctx.n_channels, cfg.max_channels, rng), ctx)
        for _ in range(cfg.pop_size)
    ]
    trace = [_trace_row(0, pop)]

    for g in range(1, cfg.generations + 1):
        _rank_and_crowd(pop)

        offspring: list[ScoredSolution] = []
        for _ in range(cfg.pop_size // 2):
            pa = binary_tournament(pop, rng)
            pb = binary_tournament(pop, rng)
            for child in single_point_crossover(pa.mask, pb.mask, cfg.p_c, rng):
                child = bit_flip_mutation(child, cfg.p_m, rng, cfg.per_individual_mutation)
                child = repair(child, cfg.max_channels, rng)
                offspring.append(_scored(child, ctx))

        combined = pop + offspring
        fronts = _rank_and_crowd(combined)
        pop = _environmental_selection(combined, fronts, cfg.pop_size)
        trace.append(_trace_row(g, pop))

    fronts = _rank_and_crowd(pop)
    front0 = [pop[i] for i in fronts[0]]
    return OptimizerResult(front=front0, population=pop, trace=np.array(trace))


def _environmental_selection(
    combined: list[ScoredSolution], fronts: list[list[int]], size: int
) -> list[ScoredSolution]:
    selected: list[ScoredSolution] = []
    for front in fronts:
        if len(selected) + len(front) <= size:
            selected.extend(combined[i] for i in front)
        else:
            by_crowding = sorted(front, key=lambda i: -combined[i].crowding)
            selected.extend(combined[i] for i in by_crowding[: size - len(selected)])
            break
    return selected


# ---------------------------------------------------------------------------
# MOPSO
# ---------------------------------------------------------------------------


def _select_leader(
    rep: ParetoArchive, divisions: int, rng: np.random.Generator
) -> ScoredSolution:
    """Roulette over occupied grid cells weighted by inverse occupancy,
    then a uniform member of the winning cell."""
    if len(rep.members) == 1:
        return rep.members[0]
    cells = grid_cells(rep.objectives(), divisions)
    unique, counts = np.unique(cells, return_counts=True)
    weights = 1.0 / counts
    cell = rng.choice(unique, p=weights / weights.sum())
    member = rng.choice(np.flatnonzero(cells == cell))
    return rep.members[int(member)]


def run_mopso(ctx: ObjectiveContext, cfg: MopsoConfig, seed: int) -> OptimizerResult:
    """Binary particle swarm with an external non-dominated repository.

    Velocities are real-valued over the {0,1}-coded positions; each bit is
    resampled with probability sigmoid(velocity). Personal bests update
    only on strict dominance.
    """
    if cfg.max_channels > ctx.n_channels:
        raise ConfigError("max_channels exceeds the number of channels")
    rng = np.random.default_rng(seed)
    grid = GridConfig(cfg.grid_divisions)

    positions = [
        _scored(random_mask(ctx.n_channels, cfg.max_channels, rng), ctx)
        for _ in range(cfg.swarm_size)
    ]
    state = SwarmState(
        pos=positions,
        vel=np.zeros((cfg.swarm_size, ctx.n_channels)),
        pbest=[s.copy() for s in positions],
        rep=ParetoArchive(capacity=cfg.repository_capacity),
    )
    for s in positions:
        archive_insert(state.rep, s.copy(), grid, rng)
    trace = [_trace_row(0, state.pos)]

    for t in range(1, cfg.iterations + 1):
        for j in range(cfg.swarm_size):
            gbest = _select_leader(state.rep, cfg.grid_divisions, rng)
            x = state.pos[j].mask.astype(np.float64)
            r1 = rng.random(ctx.n_channels)
            r2 = rng.random(ctx.n_channels)
            state.vel[j] = (
                cfg.inertia * state.vel[j]
                + cfg.c1 * r1 * (state.pbest[j].mask.astype(np.float64) - x)
                + cfg.c2 * r2 * (gbest.mask.astype(np.float64) - x)
            )
            np.clip(state.vel[j], -VELOCITY_CLAMP, VELOCITY_CLAMP, out=state.vel[j])

            prob = 1.0 / (1.0 + np.exp(-state.vel[j]))
            mask = rng.random(ctx.n_channels) < prob
            mask = repair(mask, cfg.max_channels, rng)
            mask = bit_flip_mutation(mask, cfg.p_m, rng, cfg.per_individual_mutation)
            mask = repair(mask, cfg.max_channels, rng)
            s = _scored(mask, ctx)
            if dominates(s.obj, state.pbest[j].obj):
                state.pbest[j] = s.copy()
            state.pos[j] = s
        for s in state.pos:
            archive_insert(state.rep, s.copy(), grid, rng)
        trace.append(_trace_row(t, state.pos))

    return OptimizerResult(
        front=list(state.rep.members), population=state.pos, trace=np.array(trace)
    )


# ---------------------------------------------------------------------------
# MOEA/D
# ---------------------------------------------------------------------------


def run_moead(ctx: ObjectiveContext, cfg: MoeadConfig, seed: int) -> OptimizerResult:
    """Tchebycheff decomposition with neighbourhood mating and replacement.

    Weight vectors are uniform on the 2-simplex; the ideal point tracks the
    component-wise best objectives seen so far.
    """
    if cfg.max_channels > ctx.n_channels:
        raise ConfigError("max_channels exceeds the number of channels")
    rng = np.random.default_rng(seed)
    P = cfg.subproblems

    lam = np.stack([np.linspace(0, 1, P), np.linspace(1, 0, P)], axis=1)
    dists = np.linalg.norm(lam[:, None, :] - lam[None, :, :], axis=2)
    neighbors = np.argsort(dists, axis=1, kind="stable")[:, : cfg.neighborhood]

    solutions = [random_mask(ctx.n_channels, cfg.max_channels, rng) for _ in range(P)]
    objs = [evaluate(x, ctx) for x in solutions]
    z_star = np.minimum.reduce(objs)
    ideal_trace = [z_star.copy()]
    trace = [_trace_row(0, [ScoredSolution(x, f) for x, f in zip(solutions, objs)])]

    for g in range(1, cfg.generations + 1):
        for k in range(P):
            pool = neighbors[k] if rng.random() < cfg.delta else np.arange(P)
            p_idx, q_idx = rng.choice(pool, size=2, replace=False)
            child, _ = single_point_crossover(
                solutions[p_idx], solutions[q_idx], cfg.p_c, rng
            )
            child = bit_flip_mutation(child, cfg.p_m, rng, cfg.per_individual_mutation)
            child = repair(child, cfg.max_channels, rng)
            f_child = evaluate(child, ctx)
            z_star = np.minimum(z_star, f_child)
            for j in neighbors[k]:
                if tchebycheff(f_child, lam[j], z_star) < tchebycheff(objs[j], lam[j], z_star):
                    solutions[j] = child.copy()
                    objs[j] = f_child.copy()
        ideal_trace.append(z_star.copy())
        trace.append(_trace_row(g, [ScoredSolution(x, f) for x, f in zip(solutions, objs)]))

    final = [ScoredSolution(x.copy(), f.copy()) for x, f in zip(solutions, objs)]
    fronts = _rank_and_crowd(final)
    # Subproblems routinely converge to the same mask; the reported ND set
    # keeps one copy of each.
    front0: list[ScoredSolution] = []
    seen: set[bytes] = set()
    for i in fronts[0]:
        key = final[i].mask.tobytes()
        if key not in seen:
            seen.add(key)
            front0.append(final[i])
    return OptimizerResult(
        front=front0,
        population=final,
        trace=np.array(trace),
        ideal_trace=np.array(ideal_trace),
    )
