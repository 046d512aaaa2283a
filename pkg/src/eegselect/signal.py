"""Trial preprocessing and per-trial task-related desynchronisation.

A trial's desynchronisation score is the percentage change in mean band
power between its activation and baseline windows,

    100 * (P_act - P_base) / P_base,

with each power estimated by Welch's method (Hamming window, 50% overlap by
default). Negative values mean the band power dropped during the task
(desynchronisation), positive values mean it rose.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.signal

from .errors import ConfigError, DegenerateBaselineError

__all__ = [
    "TrialSet",
    "BandpassConfig",
    "WelchConfig",
    "PowerSpectrum",
    "bandpass",
    "baseline_correct",
    "welch_psd",
    "ittrd",
    "ittrd_matrix",
]

# Baseline band powers below this are treated as degenerate (uV^2/Hz).
BASELINE_POWER_FLOOR = 1e-12

# Absorbs f32 rounding of window markers stored in trial files.
_WINDOW_TOL = 1e-4


@dataclass(frozen=True)
class TrialSet:
    """Epoched multi-channel EEG with labels and window markers.

    data is (n_trials, n_channels, n_samples) in microvolts; labels are the
    per-trial class ids (0 = left hand, 1 = right hand). Windows are in
    seconds relative to trial start, baseline strictly before activation.
    """

    data: np.ndarray
    labels: np.ndarray
    fs: float
    baseline_window: tuple[float, float]
    activation_window: tuple[float, float]
    channel_names: tuple[str, ...] | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if data.ndim != 3:
            raise ValueError("trial data must be (n_trials, n_channels, n_samples)")
        if labels.shape != (data.shape[0],):
            raise ValueError("labels length must equal n_trials")
        if labels.size and not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be 0 or 1")
        if not self.fs > 0:
            raise ValueError("sampling rate must be positive")
        duration = data.shape[2] / self.fs
        b0, b1 = self.baseline_window
        a0, a1 = self.activation_window
        if not (-_WINDOW_TOL <= b0 < b1 <= a0 < a1 <= duration + _WINDOW_TOL):
            raise ValueError(
                f"windows must satisfy 0 <= baseline < activation <= {duration:.3f}s"
            )
        if self.channel_names is not None:
            names = tuple(self.channel_names)
            if len(names) != data.shape[1]:
                raise ValueError("channel_names length must equal n_channels")
            object.__setattr__(self, "channel_names", names)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def with_data(self, data: np.ndarray) -> "TrialSet":
        return replace(self, data=data)

    def select_trials(self, indices) -> "TrialSet":
        idx = np.asarray(indices)
        return replace(self, data=self.data[idx], labels=self.labels[idx])

    def select_channels(self, indices) -> "TrialSet":
        idx = np.asarray(indices)
        names = None
        if self.channel_names is not None:
            names = tuple(self.channel_names[i] for i in idx)
        return replace(self, data=self.data[:, idx, :], channel_names=names)

    def window_slice(self, window: tuple[float, float]) -> slice:
        i0 = int(round(window[0] * self.fs))
        i1 = int(round(window[1] * self.fs))
        return slice(max(i0, 0), min(i1, self.n_samples))


@dataclass(frozen=True)
class BandpassConfig:
    """Butterworth bandpass: 5th order, 4-40 Hz by default."""

    order: int = 5
    band: tuple[float, float] = (4.0, 40.0)

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError("filter order must be >= 1")
        lo, hi = self.band
        if not 0 < lo < hi:
            raise ConfigError("band must satisfy 0 < f_lo < f_hi")


@dataclass(frozen=True)
class WelchConfig:
    """Welch estimation settings plus the band integrated for power.

    segment_len is an upper bound: windows shorter than it are analysed as
    a single segment. The default integration band (8-30 Hz) covers the mu
    and beta rhythms.
    """

    segment_len: int = 256
    overlap: float = 0.5
    window: str = "hamming"
    band: tuple[float, float] = (8.0, 30.0)

    def __post_init__(self):
        if self.segment_len < 8:
            raise ConfigError("segment_len must be >= 8")
        if not 0 <= self.overlap < 1:
            raise ConfigError("overlap must be in [0, 1)")
        lo, hi = self.band
        if not 0 < lo < hi:
            raise ConfigError("band must satisfy 0 < f_lo < f_hi")


class PowerSpectrum(NamedTuple):
    freqs: np.ndarray
    power: np.ndarray


def bandpass(trials: TrialSet, cfg: BandpassConfig = BandpassConfig()) -> TrialSet:
    """Zero-phase Butterworth bandpass of every channel of every trial.

    Forward-backward filtering with reflective edge padding of 3x the
    filter order; shape and labels are unchanged.
    """
    filtered = bandpass_array(trials.data, trials.fs, cfg)
    return trials.with_data(filtered)


def bandpass_array(data: np.ndarray, fs: float, cfg: BandpassConfig = BandpassConfig()) -> np.ndarray:
    lo, hi = cfg.band
    if hi >= fs / 2:
        raise ConfigError(f"band edge {hi} Hz reaches Nyquist ({fs / 2} Hz)")
    z, p, k = scipy.signal.butter(cfg.order, [lo, hi], btype="bandpass", fs=fs, output="zpk")
    if np.any(np.abs(p) >= 1.0):
        raise ConfigError("unstable filter design: poles on or outside the unit circle")
    sos = scipy.signal.zpk2sos(z, p, k)
    padlen = 3 * cfg.order
    if padlen >= data.shape[-1]:
        raise ValueError(f"signals too short for padding ({padlen} samples)")
    return scipy.signal.sosfiltfilt(sos, data, axis=-1, padtype="even", padlen=padlen)


def baseline_correct(trials: TrialSet, reference_mean: np.ndarray) -> TrialSet:
    """Subtract a per-channel reference mean from every sample."""
    ref = np.asarray(reference_mean, dtype=np.float64)
    if ref.shape != (trials.n_channels,):
        raise ValueError(
            f"reference_mean has length {ref.shape}, expected ({trials.n_channels},)"
        )
    return trials.with_data(trials.data - ref[None, :, None])


def welch_psd(x: np.ndarray, fs: float, cfg: WelchConfig = WelchConfig()) -> PowerSpectrum:
    """One-sided Welch power spectral density of a sample vector.

    Mean of windowed modified periodograms with the configured overlap,
    density-normalized so a unit-variance white signal integrates to about
    its variance.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("welch_psd expects a 1-D sample vector")
    if x.size < cfg.segment_len:
        raise ValueError(f"need at least segment_len={cfg.segment_len} samples, got {x.size}")
    freqs, power = _welch(x, fs, cfg, nperseg=cfg.segment_len)
    return PowerSpectrum(freqs, power)


def _welch(arr: np.ndarray, fs: float, cfg: WelchConfig, nperseg: int):
    noverlap = int(cfg.overlap * nperseg)
    return scipy.signal.welch(
        arr,
        fs=fs,
        window=cfg.window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
        scaling="density",
        axis=-1,
    )


def _mean_band_power(arr: np.ndarray, fs: float, cfg: WelchConfig) -> np.ndarray:
    """Mean PSD over cfg.band along the last axis; works on any shape."""
    n = arr.shape[-1]
    if n < 8:
        raise ValueError(f"window of {n} samples is too short for Welch estimation")
    nperseg = min(cfg.segment_len, n)
    freqs, power = _welch(arr, fs, cfg, nperseg=nperseg)
    lo, hi = cfg.band
    in_band = (freqs >= lo) & (freqs <= hi)
    if not np.any(in_band):
        raise ValueError(
            f"no frequency bins inside {cfg.band} Hz at resolution {freqs[1] - freqs[0]:.3f} Hz"
        )
    return power[..., in_band].mean(axis=-1)


def ittrd(
    x: np.ndarray,
    fs: float,
    baseline_window: tuple[float, float],
    activation_window: tuple[float, float],
    cfg: WelchConfig = WelchConfig(),
) -> float:
    """Percent band-power change of one channel of one trial.

    Raises DegenerateBaselineError when the baseline band power falls below
    the floor; callers substitute a worst-case score.
    """
    x = np.asarray(x, dtype=np.float64)
    b = slice(int(round(baseline_window[0] * fs)), int(round(baseline_window[1] * fs)))
    a = slice(int(round(activation_window[0] * fs)), int(round(activation_window[1] * fs)))
    p_base = float(_mean_band_power(x[b], fs, cfg))
    p_act = float(_mean_band_power(x[a], fs, cfg))
    if p_base < BASELINE_POWER_FLOOR:
        raise DegenerateBaselineError(f"baseline band power {p_base:.3e} below floor")
    return 100.0 * (p_act - p_base) / p_base


def ittrd_matrix(trials: TrialSet, cfg: WelchConfig = WelchConfig()) -> np.ndarray:
    """(n_trials, n_channels) percent-change matrix.

    Cells with a degenerate baseline are flagged as NaN rather than blowing
    up; downstream scoring treats them as uninformative.
    """
    base = trials.data[:, :, trials.window_slice(trials.baseline_window)]
    act = trials.data[:, :, trials.window_slice(trials.activation_window)]
    p_base = _mean_band_power(base, trials.fs, cfg)
    p_act = _mean_band_power(act, trials.fs, cfg)
    ok = p_base >= BASELINE_POWER_FLOOR
    out = np.full(p_base.shape, np.nan)
    np.divide(100.0 * (p_act - p_base), p_base, out=out, where=ok)
    return out
