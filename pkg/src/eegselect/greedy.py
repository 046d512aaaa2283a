"""Accuracy-driven forward channel selection, the domain-agnostic baseline.

Channels are first ranked by single-channel cross-validated accuracy; the
subset then grows greedily, adding whichever channel raises (or once per
streak, preserves) the best accuracy, until 16 channels or no candidate
avoids a drop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .signal import TrialSet

__all__ = ["GreedyStep", "GreedyTrace", "rank_single_channels", "greedy_select"]

ChannelEvaluator = Callable[[Sequence[int]], float]


@dataclass(frozen=True)
class GreedyStep:
    channel: int
    subset: tuple[int, ...]
    accuracy: float


@dataclass(frozen=True)
class GreedyTrace:
    ranked_channels: tuple[int, ...]
    steps: tuple[GreedyStep, ...]
    final_subset: np.ndarray

    def __post_init__(self):
        accs = [s.accuracy for s in self.steps]
        assert all(b >= a for a, b in zip(accs, accs[1:])), "non-monotone trace"


def _check_labels(trials: TrialSet) -> None:
    counts = np.bincount(trials.labels, minlength=2)
    if counts.min() < 2:
        raise ValueError("need at least 2 trials of each class")


def rank_single_channels(trials: TrialSet, evaluate: ChannelEvaluator) -> list[int]:
    """Channels sorted by single-channel accuracy, ties by channel index."""
    _check_labels(trials)
    scores = [evaluate([ch]) for ch in range(trials.n_channels)]
    return sorted(range(trials.n_channels), key=lambda ch: (-scores[ch], ch))


def greedy_select(
    trials: TrialSet,
    evaluate: ChannelEvaluator,
    max_channels: int = 16,
) -> GreedyTrace:
    """Forward selection from the top-ranked channel.

    A step is accepted when its best candidate strictly improves the
    accuracy, or matches it (allowed at most once per plateau streak so
    flat landscapes terminate early).
    """
    _check_labels(trials)
    ranked = rank_single_channels(trials, evaluate)
    subset = [ranked[0]]
    best = evaluate(subset)
    steps = [GreedyStep(ranked[0], tuple(subset), best)]
    plateau_used = False

    while len(subset) < max_channels:
        candidates = [ch for ch in range(trials.n_channels) if ch not in subset]
        if not candidates:
            break
        accs = [evaluate(subset + [ch]) for ch in candidates]
        pick = min(range(len(candidates)), key=lambda i: (-accs[i], candidates[i]))
        acc, ch = accs[pick], candidates[pick]
        if acc > best:
            plateau_used = False
        elif acc == best and not plateau_used:
            plateau_used = True
        else:
            break
        subset.append(ch)
        best = acc
        steps.append(GreedyStep(ch, tuple(subset), acc))

    mask = np.zeros(trials.n_channels, dtype=bool)
    mask[subset] = True
    return GreedyTrace(tuple(ranked), tuple(steps), mask)
