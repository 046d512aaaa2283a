"""The two-objective scoring of channel masks, in minimization space.

Both raw criteria (spatial relevance, desynchronisation magnitude) are
additive per-channel scores to be maximized; the optimizers minimize their
negated sums:

    f1 = -sum(sp_i * x_i)      f2 = -sum(d_i * x_i)

Masks are boolean vectors over the montage channels, constrained to at
most ``max_channels`` selected (and never empty after repair).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ObjectiveContext",
    "channel_discriminability",
    "evaluate",
    "repair",
    "random_mask",
]


@dataclass(frozen=True)
class ObjectiveContext:
    """Cached per-channel scores plus the cardinality bound.

    Immutable and shareable across workers; evaluation is pure.
    """

    sp: np.ndarray
    disc: np.ndarray
    max_channels: int

    def __post_init__(self):
        sp = np.asarray(self.sp, dtype=np.float64)
        disc = np.asarray(self.disc, dtype=np.float64)
        if sp.ndim != 1 or sp.shape != disc.shape:
            raise ValueError("sp and disc must be equal-length vectors")
        if not 1 <= self.max_channels <= sp.size:
            raise ValueError("max_channels must be in [1, n_channels]")
        for arr in (sp, disc):
            arr.flags.writeable = False
        object.__setattr__(self, "sp", sp)
        object.__setattr__(self, "disc", disc)

    @property
    def n_channels(self) -> int:
        return self.sp.size

    def normalized(self) -> "ObjectiveContext":
        """Min-max scale both score vectors to [0, 1] (experimental knob;
        the default pipeline runs on raw scales)."""
        return replace(self, sp=_minmax(self.sp), disc=_minmax(self.disc))


def _minmax(v: np.ndarray) -> np.ndarray:
    span = v.max() - v.min()
    if span == 0:
        return np.zeros_like(v)
    return (v - v.min()) / span


def channel_discriminability(ittrd_mat: np.ndarray) -> np.ndarray:
    """Mean desynchronisation magnitude per channel.

    For each channel, the mean over trials of max(0, -score): power drops
    count with their magnitude, power increases and degenerate (NaN) cells
    count as zero.
    """
    mat = np.asarray(ittrd_mat, dtype=np.float64)
    if mat.ndim != 2 or mat.size == 0:
        raise ValueError("expected a non-empty (n_trials, n_channels) matrix")
    mag = np.clip(-np.nan_to_num(mat, nan=0.0), 0.0, None)
    return mag.mean(axis=0)


def evaluate(mask: np.ndarray, ctx: ObjectiveContext) -> np.ndarray:
    """Objective vector (f1, f2) of a mask; lower is better on both."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (ctx.n_channels,):
        raise ValueError(f"mask length {mask.size} != {ctx.n_channels} channels")
    if not mask.any():
        raise ValueError("empty mask; repair before evaluating")
    return np.array([-ctx.sp[mask].sum(), -ctx.disc[mask].sum()])


def repair(mask: np.ndarray, max_channels: int, rng: np.random.Generator) -> np.ndarray:
    """Enforce 1 <= popcount <= max_channels.

    Excess bits are deselected uniformly at random; an all-zero mask gets
    one random bit. Feasible masks pass through unchanged.
    """
    mask = np.asarray(mask, dtype=bool).copy()
    selected = np.flatnonzero(mask)
    if selected.size == 0:
        mask[rng.integers(mask.size)] = True
    elif selected.size > max_channels:
        drop = rng.choice(selected, size=selected.size - max_channels, replace=False)
        mask[drop] = False
    return mask


def random_mask(n_channels: int, max_channels: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random popcount in [1, max_channels], then that many
    distinct channels uniformly."""
    k = int(rng.integers(1, max_channels + 1))
    mask = np.zeros(n_channels, dtype=bool)
    mask[rng.choice(n_channels, size=k, replace=False)] = True
    return mask
