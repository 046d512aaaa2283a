"""Final-subset choice, selection-frequency topography and one-way ANOVA."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .montage import Montage

__all__ = [
    "CandidateResult",
    "RunResult",
    "choose_final_subset_index",
    "choose_final_subset",
    "selection_frequency",
    "write_selection_frequency_csv",
    "write_topomap_svg",
    "anova_oneway",
]


@dataclass(frozen=True)
class CandidateResult:
    """One evaluated channel subset; objectives are None for the greedy
    baseline, which carries no objective vector."""

    mask: np.ndarray
    acc_all: float
    acc_sel: float
    objectives: tuple[float, float] | None = None


@dataclass(frozen=True)
class RunResult:
    subject: str
    algorithm: str
    seed: int
    candidates: tuple[CandidateResult, ...]
    chosen_index: int

    def __post_init__(self):
        if not 0 <= self.chosen_index < len(self.candidates):
            raise ValueError("chosen_index outside candidate list")

    @property
    def chosen(self) -> CandidateResult:
        return self.candidates[self.chosen_index]

    @property
    def pr(self) -> int:
        """Number of channels in the chosen subset."""
        return int(self.chosen.mask.sum())


def choose_final_subset_index(
    candidates: Sequence[tuple[np.ndarray, float]], ref_indices: Sequence[int]
) -> int:
    """Pick the candidate containing a reference channel (C3/C4) with the
    highest accuracy; without any such candidate, fall back to the global
    best. Ties break toward smaller subsets, then the lower list index."""
    if not candidates:
        raise ValueError("no candidates")
    refs = list(ref_indices)
    with_ref = [i for i, (mask, _) in enumerate(candidates) if np.asarray(mask)[refs].any()]
    pool = with_ref or range(len(candidates))
    return min(pool, key=lambda i: (-candidates[i][1], np.asarray(candidates[i][0]).sum(), i))


def choose_final_subset(
    candidates: Sequence[tuple[np.ndarray, float]], ref_indices: Sequence[int]
) -> np.ndarray:
    return np.asarray(candidates[choose_final_subset_index(candidates, ref_indices)][0])


def selection_frequency(results: Sequence[RunResult], montage: Montage) -> np.ndarray:
    """Per-channel count of appearances in chosen subsets."""
    counts = np.zeros(montage.n_channels, dtype=np.int64)
    for r in results:
        if r.chosen.mask.size != montage.n_channels:
            raise ValueError(f"run {r.subject}/{r.algorithm} mask does not fit montage")
        counts += r.chosen.mask.astype(np.int64)
    return counts


def write_selection_frequency_csv(counts: np.ndarray, montage: Montage, path) -> None:
    lines = ["channel,count"]
    lines += [f"{name},{int(c)}" for name, c in zip(montage.names, counts)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _project_2d(position: np.ndarray) -> tuple[float, float]:
    """Azimuthal-equidistant projection, nasion up."""
    x, y, z = position
    theta = math.acos(max(-1.0, min(1.0, z)))
    r_xy = math.hypot(x, y)
    if r_xy == 0.0:
        return 0.0, 0.0
    return theta * x / r_xy, theta * y / r_xy


def write_topomap_svg(counts: np.ndarray, montage: Montage, path) -> None:
    """Flat scalp map with electrodes coloured white -> red by count."""
    size, margin = 400.0, 40.0
    scale = (size / 2 - margin) / (math.pi / 2 * 1.3)
    center = size / 2
    peak = max(int(counts.max()), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" '
        f'viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<circle cx="{center}" cy="{center}" r="{math.pi / 2 * scale:.1f}" '
        'fill="none" stroke="#888" stroke-width="1.5"/>',
    ]
    for name, pos, count in zip(montage.names, montage.positions, counts):
        px, py = _project_2d(pos)
        cx = center + px * scale
        cy = center - py * scale
        frac = count / peak
        red = 255
        other = int(round(255 * (1 - frac)))
        parts.append(
            f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="9" '
            f'fill="rgb({red},{other},{other})" stroke="#444" stroke-width="0.8"/>'
        )
        parts.append(
            f'<text x="{cx:.1f}" y="{cy + 2.5:.1f}" font-size="6" '
            f'text-anchor="middle" fill="#222">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def anova_oneway(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Classic one-way ANOVA F statistic and upper-tail p value.

    p comes from the regularized incomplete beta form of the F survival
    function.
    """
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(arrays) < 2:
        raise ValueError("need at least 2 groups")
    if any(a.size < 2 for a in arrays):
        raise ValueError("every group needs at least 2 observations")
    n_total = sum(a.size for a in arrays)
    k = len(arrays)
    grand = np.concatenate(arrays).mean()
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    df_between = k - 1
    df_within = n_total - k
    if ss_within == 0.0:
        raise ValueError("zero within-group variance; F is undefined")
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(betainc(df_within / 2.0, df_between / 2.0, df_within / (df_within + df_between * f_stat)))
    return float(f_stat), p
