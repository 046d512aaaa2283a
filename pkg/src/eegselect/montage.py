"""Electrode geometry and Gaussian spatial-relevance scores.

Positions live on the unit sphere (x toward the right ear, y toward the
nasion, z up). The built-in montages use the idealized spherical 10-10
layout in which the equator runs through Fpz, T7, Oz and T8, so C3 sits at
a 45 degree polar angle: (-0.7071, 0, 0.7071). Relevance of a channel is a
Gaussian kernel of its Euclidean (chord) distance to the nearest reference
electrode, 1.0 exactly on the references themselves.
"""

from __future__ import annotations

import csv
import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "Electrode",
    "Montage",
    "SpatialKernelConfig",
    "load_montage",
    "builtin_montage",
    "spatial_relevance",
    "relevance_vector",
]

DEFAULT_REFERENCE_NAMES = ("C3", "C4")


@dataclass(frozen=True)
class Electrode:
    """A named electrode at a unit-sphere head position."""

    name: str
    position: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise DataError(f"electrode {self.name!r}: position must be a finite 3-vector")
        norm = float(np.linalg.norm(pos))
        if not 0.99 <= norm <= 1.01:
            raise DataError(f"electrode {self.name!r}: position norm {norm:.4f} not on unit sphere")
        pos.flags.writeable = False
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True, eq=False)
class Montage:
    """Ordered electrode list; the order is the canonical channel order.

    ``refs`` holds indices of the reference electrodes (C3/C4 by default
    when present). Immutable after construction and safe to share across
    workers.
    """

    electrodes: tuple[Electrode, ...]
    refs: tuple[int, ...]
    positions: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.electrodes) < 2:
            raise DataError("montage needs at least 2 electrodes")
        names = [e.name for e in self.electrodes]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate electrode names: {', '.join(dupes)}")
        if not self.refs:
            raise DataError("montage needs at least one reference electrode")
        n = len(self.electrodes)
        for r in self.refs:
            if not 0 <= r < n:
                raise DataError(f"reference index {r} out of range for {n} electrodes")
        pos = np.stack([e.position for e in self.electrodes])
        pos.flags.writeable = False
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_positions(cls, names, positions, refs=None) -> "Montage":
        electrodes = tuple(Electrode(n, p) for n, p in zip(names, positions))
        if refs is None:
            refs = _default_refs(names)
        return cls(electrodes=electrodes, refs=tuple(refs))

    @property
    def n_channels(self) -> int:
        return len(self.electrodes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.electrodes)

    def index(self, name: str) -> int:
        for i, e in enumerate(self.electrodes):
            if e.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class SpatialKernelConfig:
    """Gaussian kernel radius in montage (unit-sphere) units."""

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def _default_refs(names) -> tuple[int, ...]:
    refs = tuple(i for i, n in enumerate(names) if n in DEFAULT_REFERENCE_NAMES)
    if not refs:
        raise DataError(
            "montage has neither C3 nor C4; pass reference indices explicitly"
        )
    return refs


def load_montage(path, refs=None) -> Montage:
    """Read a ``name,x,y,z`` CSV and return a Montage in file order.

    Positions are renormalized onto the unit sphere. References default to
    the rows named C3/C4.
    """
    names: list[str] = []
    raw: list[list[float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["name", "x", "y", "z"]:
            raise DataError(f"{path}: expected header 'name,x,y,z'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            names.append(row[0].strip())
            try:
                raw.append([float(c) for c in row[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad coordinate: {exc}") from exc
    if len(names) < 2:
        raise DataError(f"{path}: montage needs at least 2 electrode rows")
    coords = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(coords)):
        raise DataError(f"{path}: non-finite coordinates")
    norms = np.linalg.norm(coords, axis=1)
    if np.any(norms == 0):
        raise DataError(f"{path}: zero-length position vector")
    coords = coords / norms[:, None]
    return Montage.from_positions(names, coords, refs=refs)


# Per-montage relevance cache: montage identity -> {sigma: scores}.
_relevance_cache: "weakref.WeakKeyDictionary[Montage, dict]" = weakref.WeakKeyDictionary()


def spatial_relevance(montage: Montage, k: int, cfg: SpatialKernelConfig = SpatialKernelConfig()) -> float:
    """Gaussian proximity of channel ``k`` to its nearest reference.

    exp(-d^2 / (2 sigma^2)) with d the chord distance to the nearest
    reference electrode; exactly 1.0 iff channel k is itself a reference.
    """
    if not 0 <= k < montage.n_channels:
        raise IndexError(f"channel index {k} out of range")
    d2 = _nearest_ref_sq_distances(montage)[k]
    return float(math.exp(-d2 / (2.0 * cfg.sigma**2)))


def relevance_vector(montage: Montage, cfg: SpatialKernelConfig = SpatialKernelConfig()) -> np.ndarray:
    """Per-channel spatial relevance, computed once per (montage, sigma)."""
    per_sigma = _relevance_cache.setdefault(montage, {})
    cached = per_sigma.get(cfg.sigma)
    if cached is None:
        d2 = _nearest_ref_sq_distances(montage)
        cached = np.exp(-d2 / (2.0 * cfg.sigma**2))
        cached.flags.writeable = False
        per_sigma[cfg.sigma] = cached
    return cached


def _nearest_ref_sq_distances(montage: Montage) -> np.ndarray:
    diffs = montage.positions[:, None, :] - montage.positions[list(montage.refs), None, :].transpose(1, 0, 2)
    return np.min(np.sum(diffs**2, axis=2), axis=1)


# ---------------------------------------------------------------------------
# Built-in idealized spherical 10-10 layouts.
# ---------------------------------------------------------------------------

# Channel order of the 64-electrode Physionet motor-imagery recordings.
PHYSIONET64_NAMES = (
    "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6",
    "C5", "C3", "C1", "Cz", "C2", "C4", "C6",
    "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
    "Fp1", "Fpz", "Fp2",
    "AF7", "AF3", "AFz", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
    "FT7", "FT8",
    "T7", "T8", "T9", "T10",
    "TP7", "TP8",
    "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
    "PO7", "PO3", "POz", "PO4", "PO8",
    "O1", "Oz", "O2",
    "Iz",
)

# 22 EEG channels of the BCI Competition IV dataset 2a.
BCIIV2A22_NAMES = (
    "Fz",
    "FC3", "FC1", "FCz", "FC2", "FC4",
    "C5", "C3", "C1", "Cz", "C2", "C4", "C6",
    "CP3", "CP1", "CPz", "CP2", "CP4",
    "P1", "Pz", "P2",
    "POz",
)


def _sph(polar_deg: float, azimuth_deg: float) -> np.ndarray:
    th = math.radians(polar_deg)
    ph = math.radians(azimuth_deg)
    return np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])


def _arc_point(p_outer: np.ndarray, p_mid: np.ndarray, p_outer2: np.ndarray, frac: float) -> np.ndarray:
    """Point at ``frac`` of the arc from p_outer to p_mid on the circle
    through the three points (a small circle in general)."""
    n = np.cross(p_mid - p_outer, p_outer2 - p_outer)
    n = n / np.linalg.norm(n)
    center = float(np.dot(n, p_outer)) * n
    u = p_outer - center
    r = float(np.linalg.norm(u))
    u = u / r
    w = np.cross(n, u)
    a_mid = math.atan2(float(np.dot(p_mid - center, w)), float(np.dot(p_mid - center, u)))
    if a_mid < 0:
        w = -w
        a_mid = -a_mid
    a = frac * a_mid
    p = center + r * (u * math.cos(a) + w * math.sin(a))
    return p / np.linalg.norm(p)


def _tenten_positions() -> dict[str, np.ndarray]:
    pos: dict[str, np.ndarray] = {"Cz": _sph(0, 0)}

    # Midline: 22.5 degree steps from Fpz (front) over Cz to Oz (back).
    for name, polar, az in [
        ("Fpz", 90, 90), ("AFz", 67.5, 90), ("Fz", 45, 90), ("FCz", 22.5, 90),
        ("CPz", 22.5, 270), ("Pz", 45, 270), ("POz", 67.5, 270), ("Oz", 90, 270),
    ]:
        pos[name] = _sph(polar, az)

    # Equator ring, 18 degree azimuth steps from Fpz toward each ear.
    ring = [("Fp1", 108), ("AF7", 126), ("F7", 144), ("FT7", 162), ("T7", 180),
            ("TP7", 198), ("P7", 216), ("PO7", 234), ("O1", 252)]
    for name, az in ring:
        pos[name] = _sph(90, az)
        pos[_mirror_name(name)] = _sph(90, 180 - az)

    # Below-equator positions used by the Physionet cap.
    pos["T9"] = _sph(112.5, 180)
    pos["T10"] = _sph(112.5, 0)
    pos["Iz"] = _sph(112.5, 270)

    # Intermediate rows: interior electrodes on the circle through the
    # row's equator electrode, its midline electrode and the mirror.
    rows = {
        "C": ("T7", "Cz", ["C5", "C3", "C1"]),
        "F": ("F7", "Fz", ["F5", "F3", "F1"]),
        "FC": ("FT7", "FCz", ["FC5", "FC3", "FC1"]),
        "CP": ("TP7", "CPz", ["CP5", "CP3", "CP1"]),
        "P": ("P7", "Pz", ["P5", "P3", "P1"]),
        "AF": ("AF7", "AFz", [None, "AF3", None]),
        "PO": ("PO7", "POz", [None, "PO3", None]),
    }
    for outer, mid, interior in rows.values():
        p_outer, p_mid = pos[outer], pos[mid]
        p_outer2 = p_outer * np.array([-1.0, 1.0, 1.0])
        for i, name in enumerate(interior):
            if name is None:
                continue
            p = _arc_point(p_outer, p_mid, p_outer2, (i + 1) / 4.0)
            pos[name] = p
            pos[_mirror_name(name)] = p * np.array([-1.0, 1.0, 1.0])
    return pos


def _mirror_name(name: str) -> str:
    # Left-side labels are odd or end in 7; mirrors are even / end in 8.
    table = {"1": "2", "3": "4", "5": "6", "7": "8", "9": "10"}
    for suffix, mirror in table.items():
        if name.endswith(suffix) and not name.endswith("10"):
            return name[: -len(suffix)] + mirror
    raise ValueError(f"no mirror rule for {name!r}")


_BUILTIN_NAME_SETS = {
    "physionet64": PHYSIONET64_NAMES,
    "bciiv2a22": BCIIV2A22_NAMES,
}


def builtin_montage(name: str) -> Montage:
    """Return a built-in montage ("physionet64" or "bciiv2a22")."""
    try:
        channel_names = _BUILTIN_NAME_SETS[name]
    except KeyError:
        raise DataError(
            f"unknown montage {name!r}; built-ins: {', '.join(sorted(_BUILTIN_NAME_SETS))}"
        ) from None
    table = _tenten_positions()
    positions = [table[c] for c in channel_names]
    return Montage.from_positions(channel_names, positions)
