"""Dominance, fast non-dominated sorting, crowding and archive upkeep.

Everything here works in minimization space. Duplicate objective vectors
are legitimate (different masks can alias to the same scores); they share
a front and act as zero-gap crowding neighbours.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ScoredSolution",
    "GridConfig",
    "ParetoArchive",
    "dominates",
    "nd_sort",
    "crowding_distance",
    "archive_insert",
]


@dataclass
class ScoredSolution:
    """A mask with its objective vector, front index and crowding distance."""

    mask: np.ndarray
    obj: np.ndarray
    rank: int = -1
    crowding: float = 0.0

    def copy(self) -> "ScoredSolution":
        return ScoredSolution(self.mask.copy(), self.obj.copy(), self.rank, self.crowding)


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a <= b everywhere and a < b somewhere (minimization)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("objective vectors must have the same dimensionality")
    return bool(np.all(a <= b) and np.any(a < b))


def nd_sort(pop: list[ScoredSolution]) -> list[list[int]]:
    """Fast non-dominated sort; writes ranks back and returns index fronts.

    Standard dominance-count scheme: O(n^2) comparisons, fine for the
    population sizes used here (<= 200).
    """
    if not pop:
        raise ValueError("cannot sort an empty population")
    n = len(pop)
    objs = np.stack([s.obj for s in pop])
    # Pairwise dominance: d[i, j] true iff i dominates j.
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=2)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=2)
    dom = le & lt

    n_dominators = dom.sum(axis=0)
    dominated_by: list[np.ndarray] = [np.flatnonzero(dom[i]) for i in range(n)]

    fronts: list[list[int]] = []
    current = np.flatnonzero(n_dominators == 0).tolist()
    remaining = n_dominators.copy()
    while current:
        fronts.append(current)
        nxt: list[int] = []
        for i in current:
            pop[i].rank = len(fronts) - 1
            for j in dominated_by[i]:
                remaining[j] -= 1
                if remaining[j] == 0:
                    nxt.append(int(j))
        current = sorted(nxt)
    return fronts


def crowding_distance(front: list[ScoredSolution]) -> None:
    """Write crowding distances into a mutually non-dominated front.

    Boundary solutions per objective get infinity; interior ones sum the
    normalized neighbour gaps. A zero objective range contributes nothing.
    """
    if not front:
        return
    m = front[0].obj.size
    dist = np.zeros(len(front))
    for k in range(m):
        vals = np.array([s.obj[k] for s in front])
        order = np.argsort(vals, kind="stable")
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[order[-1]] - vals[order[0]]
        if span == 0 or len(front) < 3:
            continue
        gaps = (vals[order[2:]] - vals[order[:-2]]) / span
        dist[order[1:-1]] += gaps
    for s, d in zip(front, dist):
        s.crowding = float(d)


@dataclass(frozen=True)
class GridConfig:
    """Adaptive objective-space grid used for archive eviction and
    leader roulette."""

    divisions: int = 10

    def __post_init__(self):
        if self.divisions < 1:
            raise ValueError("grid divisions must be >= 1")


@dataclass
class ParetoArchive:
    """Bounded repository of mutually non-dominated solutions.

    Single-writer: owned by one optimizer run.
    """

    capacity: int
    members: list[ScoredSolution] = field(default_factory=list)

    def objectives(self) -> np.ndarray:
        return np.stack([s.obj for s in self.members])


def grid_cells(objs: np.ndarray, divisions: int) -> np.ndarray:
    """Cell id per row of an adaptive divisions x divisions grid spanning
    the current objective ranges."""
    lo = objs.min(axis=0)
    hi = objs.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    ix = np.minimum((objs - lo) / span * divisions, divisions - 1).astype(int)
    return ix[:, 0] * divisions + ix[:, 1]


def archive_insert(
    arch: ParetoArchive,
    s: ScoredSolution,
    grid: GridConfig,
    rng: np.random.Generator,
) -> bool:
    """Insert s unless dominated; evict from the most crowded grid cell
    when over capacity. Returns whether s was inserted.

    Distinct masks with identical objective vectors coexist, but the exact
    same mask is never stored twice.
    """
    if any(dominates(m.obj, s.obj) for m in arch.members):
        return False
    if any(np.array_equal(m.mask, s.mask) for m in arch.members):
        return False
    arch.members = [m for m in arch.members if not dominates(s.obj, m.obj)]
    arch.members.append(s)
    if len(arch.members) > arch.capacity:
        cells = grid_cells(arch.objectives(), grid.divisions)
        counts = np.bincount(cells)
        fullest = counts.argmax()
        candidates = np.flatnonzero(cells == fullest)
        evict = int(rng.choice(candidates))
        del arch.members[evict]
    return True
