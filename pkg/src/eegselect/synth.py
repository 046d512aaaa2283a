"""Synthetic two-class motor-imagery EEG with a known desynchronisation.

Every channel carries pink noise (unit RMS). Channels named in
``signal_channels`` add a mu-rhythm oscillation whose amplitude drops
during the activation window: trials of the channel's contralateral class
(left-hemisphere channels desynchronise for right-hand trials and vice
versa) are attenuated 1.5x the nominal depth, ipsilateral trials 0.5x, so
the per-channel average band-power change stays at about
-100 * erd_depth while the classes remain separable. Midline channels
attenuate both classes equally.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ConfigError
from .montage import Montage
from .signal import TrialSet

__all__ = ["synth_mi_dataset"]

CONTRA_FACTOR = 1.5
IPSI_FACTOR = 0.5
MIDLINE_X = 0.05
MAX_DEPTH = 0.95


def _pink_noise(rng: np.random.Generator, shape: tuple[int, ...], n_samples: int) -> np.ndarray:
    """1/f-amplitude noise, unit RMS per row."""
    n_freq = n_samples // 2 + 1
    re = rng.standard_normal(shape + (n_freq,))
    im = rng.standard_normal(shape + (n_freq,))
    spectrum = re + 1j * im
    weights = np.zeros(n_freq)
    weights[1:] = 1.0 / np.sqrt(np.arange(1, n_freq))
    x = np.fft.irfft(spectrum * weights, n=n_samples, axis=-1)
    rms = np.sqrt((x**2).mean(axis=-1, keepdims=True))
    return x / np.maximum(rms, 1e-30)


def synth_mi_dataset(
    n_trials: int,
    montage: Montage,
    signal_channels: Sequence[str],
    erd_depth: float,
    snr: float = 3.0,
    seed: int = 0,
    fs: float = 160.0,
    trial_seconds: float = 4.5,
    baseline_window: tuple[float, float] = (0.0, 0.5),
    activation_window: tuple[float, float] = (0.5, 4.5),
    mu_freq: float = 10.0,
) -> TrialSet:
    """Deterministic synthetic TrialSet on the given montage.

    ``snr`` is the oscillation amplitude over the noise RMS; labels
    alternate 0 (left hand) and 1 (right hand).
    """
    if not 0.0 <= erd_depth < 1.0:
        raise ConfigError("erd_depth must lie in [0, 1)")
    if n_trials < 2:
        raise ConfigError("need at least 2 trials")
    channel_idx = [montage.index(name) for name in signal_channels]

    rng = np.random.default_rng(seed)
    n_channels = montage.n_channels
    n_samples = int(round(trial_seconds * fs))
    labels = np.arange(n_trials) % 2

    data = _pink_noise(rng, (n_trials, n_channels), n_samples)

    t = np.arange(n_samples) / fs
    act = slice(int(round(activation_window[0] * fs)), int(round(activation_window[1] * fs)))
    for ch in channel_idx:
        x_pos = montage.positions[ch][0]
        if x_pos < -MIDLINE_X:
            contra_class = 1  # left hemisphere desynchronises for right hand
        elif x_pos > MIDLINE_X:
            contra_class = 0
        else:
            contra_class = -1  # midline: both classes at nominal depth
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n_trials)
        for trial in range(n_trials):
            if contra_class == -1:
                depth = erd_depth
            elif labels[trial] == contra_class:
                depth = min(CONTRA_FACTOR * erd_depth, MAX_DEPTH)
            else:
                depth = IPSI_FACTOR * erd_depth
            osc = snr * np.sin(2.0 * np.pi * mu_freq * t + phases[trial])
            osc[act] *= np.sqrt(1.0 - depth)
            data[trial, ch] += osc

    return TrialSet(
        data=data,
        labels=labels,
        fs=fs,
        baseline_window=baseline_window,
        activation_window=activation_window,
        channel_names=montage.names,
    )
