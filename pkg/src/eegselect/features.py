"""Filter-bank CSP features, per-channel statistics, and mRMR selection.

The validation pipeline decomposes trials into nine non-overlapping 4 Hz
bands spanning 4-40 Hz, fits two CSP filters per class per band (36
log-variance features), appends 19 statistical/time-domain features per
selected channel, and prunes the combined matrix to the top 10 columns by
greedy mutual-information mRMR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .signal import TrialSet, BandpassConfig, bandpass_array

__all__ = [
    "DEFAULT_BANDS",
    "STAT_FEATURE_NAMES",
    "FeatureMatrix",
    "CspBand",
    "CspModel",
    "MrmrSelection",
    "FeatureCache",
    "fit_csp",
    "fit_fbcsp",
    "csp_features",
    "stat_features",
    "mrmr_select",
    "extract_features",
]

DEFAULT_BANDS: tuple[tuple[float, float], ...] = tuple(
    (float(lo), float(lo + 4)) for lo in range(4, 40, 4)
)

N_CSP_FILTERS = 4          # two per class
COV_SHRINKAGE = 1e-4
LOG_FLOOR = 1e-12
WAMP_THRESHOLD_UV = 4.0
SSC_THRESHOLD_UV = 0.5
ENTROPY_BINS = 50
MI_BINS = 10

# Fixed order of the 19 per-channel features. The first eleven are the
# named ones; the remainder complete the count (documented choice).
STAT_FEATURE_NAMES = (
    "mean",
    "std",
    "variance",
    "skewness",
    "kurtosis",
    "entropy",
    "hjorth_activity",
    "hjorth_mobility",
    "hjorth_complexity",
    "zero_crossing_rate",
    "willison_amplitude",
    "slope_sign_changes",
    "rms",
    "mean_abs_value",
    "waveform_length",
    "peak_to_peak",
    "median",
    "iqr",
    "line_length_rate",
)


@dataclass(frozen=True)
class FeatureMatrix:
    """Trials x named-features matrix with stable column order."""

    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise ValueError("values must be (n_trials, n_columns)")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix contains non-finite entries")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_trials(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    def select_columns(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = list(indices)
        return FeatureMatrix(self.values[:, idx], tuple(self.columns[i] for i in idx))

    def select_rows(self, indices) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(indices)], self.columns)

    @staticmethod
    def hstack(parts: Sequence["FeatureMatrix"]) -> "FeatureMatrix":
        values = np.hstack([p.values for p in parts])
        columns = tuple(c for p in parts for c in p.columns)
        return FeatureMatrix(values, columns)


class CspBand(NamedTuple):
    filters: np.ndarray    # (4, n_channels), rows are spatial filters
    eigvals: np.ndarray    # (4,), descending


@dataclass(frozen=True)
class CspModel:
    bands: tuple[tuple[float, float], ...]
    per_band: tuple[CspBand, ...]
    n_channels: int


@dataclass(frozen=True)
class MrmrSelection:
    """Greedy pick order with the per-step relevance/redundancy scores."""

    indices: tuple[int, ...]
    relevance: tuple[float, ...]
    redundancy: tuple[float, ...]


# ---------------------------------------------------------------------------
# CSP
# ---------------------------------------------------------------------------


def _trial_covariances(data: np.ndarray) -> np.ndarray:
    """Per-trial centered covariance matrices, (T, C, C)."""
    centered = data - data.mean(axis=-1, keepdims=True)
    n = data.shape[-1]
    return np.einsum("tcs,tds->tcd", centered, centered) / (n - 1)


def _csp_from_covs(covs: np.ndarray, labels: np.ndarray) -> CspBand:
    """Core CSP: class-averaged trace-normalized covariances, generalized
    eigenproblem Sigma0 w = lambda (Sigma0 + Sigma1) w, extreme filters."""
    n_channels = covs.shape[1]
    if n_channels < 2:
        raise ValueError("CSP needs at least 2 channels")
    classes = np.unique(labels)
    if classes.size != 2:
        raise ValueError("CSP needs exactly 2 classes present")
    traces = np.trace(covs, axis1=1, axis2=2)
    normed = covs / np.maximum(traces, LOG_FLOOR)[:, None, None]
    sigma = []
    eye = np.eye(n_channels)
    for c in classes:
        avg = normed[labels == c].mean(axis=0)
        avg = (1 - COV_SHRINKAGE) * avg + COV_SHRINKAGE * np.trace(avg) / n_channels * eye
        sigma.append(avg)
    eigvals, eigvecs = scipy.linalg.eigh(sigma[0], sigma[0] + sigma[1])
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    # Two filters per class; below 4 channels the extremes overlap and the
    # picked set carries duplicates, re-sorted so eigvals stay descending.
    pick = sorted([0, 1, n_channels - 2, n_channels - 1], key=lambda i: -eigvals[i])
    return CspBand(filters=eigvecs[:, pick].T.copy(), eigvals=eigvals[pick].copy())


def fit_csp(trials: TrialSet, band: tuple[float, float], order: int = 5) -> CspBand:
    """Fit the four extreme CSP filters for one frequency band.

    Filters satisfy w^T (Sigma0 + Sigma1) w = 1; eigenvalues come back in
    descending order and pair up as lambda0 + lambda1 = 1 across classes.
    """
    filtered = bandpass_array(trials.data, trials.fs, BandpassConfig(order, band))
    return _csp_from_covs(_trial_covariances(filtered), trials.labels)


def fit_fbcsp(
    trials: TrialSet,
    bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
    order: int = 5,
) -> CspModel:
    per_band = tuple(fit_csp(trials, band, order) for band in bands)
    return CspModel(bands=tuple(bands), per_band=per_band, n_channels=trials.n_channels)


def csp_features(model: CspModel, trials: TrialSet, order: int = 5) -> FeatureMatrix:
    """Log of band-normalized projected variances: bands x 4 filters."""
    if trials.n_channels != model.n_channels:
        raise ValueError("trial channels do not match the fitted model")
    blocks = []
    names = []
    for band, csp in zip(model.bands, model.per_band):
        filtered = bandpass_array(trials.data, trials.fs, BandpassConfig(order, band))
        covs = _trial_covariances(filtered)
        blocks.append(_csp_block(csp, covs))
        names.extend(
            f"csp_{band[0]:g}_{band[1]:g}_f{j}" for j in range(N_CSP_FILTERS)
        )
    return FeatureMatrix(np.hstack(blocks), tuple(names))


def _csp_block(csp: CspBand, covs: np.ndarray) -> np.ndarray:
    """(T, 4) log normalized projected variances from per-trial covariances."""
    var = np.einsum("fc,tcd,fd->tf", csp.filters, covs, csp.filters)
    var = np.maximum(var, LOG_FLOOR)
    return np.log(var / var.sum(axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# Statistical / time-domain features
# ---------------------------------------------------------------------------


def _entropy_50bin(data: np.ndarray) -> np.ndarray:
    """Shannon entropy of the amplitude histogram, per (trial, channel)."""
    t, c, n = data.shape
    lo = data.min(axis=-1)
    hi = data.max(axis=-1)
    span = hi - lo
    flat_ok = span > 0
    codes = np.zeros(data.shape, dtype=np.int64)
    safe_span = np.where(flat_ok, span, 1.0)
    codes = ((data - lo[..., None]) / safe_span[..., None] * ENTROPY_BINS).astype(np.int64)
    np.clip(codes, 0, ENTROPY_BINS - 1, out=codes)
    offsets = (np.arange(t * c) * ENTROPY_BINS).reshape(t, c, 1)
    counts = np.bincount(
        (codes + offsets).ravel(), minlength=t * c * ENTROPY_BINS
    ).reshape(t, c, ENTROPY_BINS)
    p = counts / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(p), 0.0)
    ent = terms.sum(axis=-1)
    return np.where(flat_ok, ent, 0.0)


def stat_feature_tensor(trials: TrialSet) -> np.ndarray:
    """(n_trials, n_channels, 19) feature tensor over all channels."""
    x = trials.data
    n = trials.n_samples
    eps = LOG_FLOOR

    mean = x.mean(axis=-1)
    var = x.var(axis=-1)
    std = np.sqrt(var)
    centered = x - mean[..., None]
    m2 = var
    m3 = (centered**3).mean(axis=-1)
    m4 = (centered**4).mean(axis=-1)
    skew = m3 / np.maximum(m2**1.5, eps)
    kurt = m4 / np.maximum(m2**2, eps) - 3.0
    entropy = _entropy_50bin(x)

    diff1 = np.diff(x, axis=-1)
    diff2 = np.diff(diff1, axis=-1)
    var_d1 = diff1.var(axis=-1)
    var_d2 = diff2.var(axis=-1)
    mobility = np.sqrt(var_d1 / np.maximum(var, eps))
    mobility_d1 = np.sqrt(var_d2 / np.maximum(var_d1, eps))
    complexity = mobility_d1 / np.maximum(mobility, eps)

    zcr = (x[..., :-1] * x[..., 1:] < 0).sum(axis=-1) / (n - 1)
    wamp = (np.abs(diff1) > WAMP_THRESHOLD_UV).sum(axis=-1).astype(float)
    left = x[..., 1:-1] - x[..., :-2]
    right = x[..., 1:-1] - x[..., 2:]
    ssc = (
        (left * right > 0)
        & ((np.abs(left) >= SSC_THRESHOLD_UV) | (np.abs(right) >= SSC_THRESHOLD_UV))
    ).sum(axis=-1).astype(float)

    rms = np.sqrt((x**2).mean(axis=-1))
    mav = np.abs(x).mean(axis=-1)
    wl = np.abs(diff1).sum(axis=-1)
    ptp = x.max(axis=-1) - x.min(axis=-1)
    median = np.median(x, axis=-1)
    q75, q25 = np.percentile(x, [75, 25], axis=-1)
    llr = wl / (n / trials.fs)

    return np.stack(
        [mean, std, var, skew, kurt, entropy, var, mobility, complexity,
         zcr, wamp, ssc, rms, mav, wl, ptp, median, q75 - q25, llr],
        axis=-1,
    )


def stat_features(trials: TrialSet, channels: Sequence[int] | None = None) -> FeatureMatrix:
    """19 statistical/time-domain features per selected channel.

    Columns are channel-major: all 19 features of the first selected
    channel, then the next, in STAT_FEATURE_NAMES order.
    """
    if trials.n_trials == 0:
        raise ValueError("no trials")
    if channels is None:
        channels = range(trials.n_channels)
    channels = list(channels)
    tensor = stat_feature_tensor(trials)[:, channels, :]
    values = tensor.reshape(trials.n_trials, len(channels) * len(STAT_FEATURE_NAMES))
    names = []
    for ch in channels:
        label = trials.channel_names[ch] if trials.channel_names else f"ch{ch}"
        names.extend(f"{label}_{feat}" for feat in STAT_FEATURE_NAMES)
    return FeatureMatrix(values, tuple(names))


# ---------------------------------------------------------------------------
# mRMR
# ---------------------------------------------------------------------------


def _bin_columns(values: np.ndarray, bins: int = MI_BINS) -> np.ndarray:
    """Equal-width binning of min-max-scaled columns -> integer codes."""
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    codes = ((values - lo) / span * bins).astype(np.int64)
    np.clip(codes, 0, bins - 1, out=codes)
    return codes


def _mi_from_joint(counts: np.ndarray) -> np.ndarray:
    """Mutual information (nats) from joint count tables (..., A, B)."""
    n = counts.sum(axis=(-2, -1), keepdims=True)
    pxy = counts / n
    px = pxy.sum(axis=-1, keepdims=True)
    py = pxy.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pxy > 0, pxy * np.log(pxy / (px * py)), 0.0)
    return terms.sum(axis=(-2, -1))


def _mi_columns_vs_code(codes: np.ndarray, other: np.ndarray, other_card: int) -> np.ndarray:
    """MI of every column's codes against one integer-coded variable."""
    n_trials, n_cols = codes.shape
    joint = codes * other_card + other[:, None]
    col_idx = np.broadcast_to(np.arange(n_cols), (n_trials, n_cols))
    counts = np.zeros((n_cols, MI_BINS * other_card))
    np.add.at(counts, (col_idx.ravel(), joint.ravel()), 1.0)
    return _mi_from_joint(counts.reshape(n_cols, MI_BINS, other_card))


def mrmr_select(fm: FeatureMatrix, labels: np.ndarray, k: int = 10) -> MrmrSelection:
    """Greedy max(relevance - mean redundancy) pick of k columns.

    Mutual information uses 10 equal-width bins on min-max-scaled columns;
    the first pick maximizes I(feature; label), ties go to the lower
    column index.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if k > fm.n_columns:
        raise ValueError(f"k={k} exceeds {fm.n_columns} columns")
    if np.unique(labels).size < 2:
        raise ValueError("both classes must be present")
    codes = _bin_columns(fm.values)
    relevance = _mi_columns_vs_code(codes, labels, int(labels.max()) + 1)

    picked: list[int] = []
    rel_out: list[float] = []
    red_out: list[float] = []
    redundancy_sum = np.zeros(fm.n_columns)
    available = np.ones(fm.n_columns, dtype=bool)
    for step in range(k):
        if step == 0:
            score = relevance.copy()
            red_step = np.zeros(fm.n_columns)
        else:
            new_red = _mi_columns_vs_code(codes, codes[:, picked[-1]], MI_BINS)
            redundancy_sum += new_red
            red_step = redundancy_sum / step
            score = relevance - red_step
        score[~available] = -np.inf
        choice = int(np.argmax(score))
        picked.append(choice)
        rel_out.append(float(relevance[choice]))
        red_out.append(float(red_step[choice]))
        available[choice] = False
    return MrmrSelection(tuple(picked), tuple(rel_out), tuple(red_out))


# ---------------------------------------------------------------------------
# Fast subset evaluation
# ---------------------------------------------------------------------------


class FeatureCache:
    """Per-trial band covariances and statistics, computed once per
    dataset so any channel subset can be evaluated by slicing.

    Per-trial quantities carry no cross-trial information, so fitting on a
    row subset leaks nothing from held-out rows.
    """

    def __init__(
        self,
        trials: TrialSet,
        bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
        order: int = 5,
    ):
        self.bands = tuple(bands)
        self.labels = trials.labels
        self.channel_names = trials.channel_names
        self.n_channels = trials.n_channels
        covs = []
        for band in self.bands:
            filtered = bandpass_array(trials.data, trials.fs, BandpassConfig(order, band))
            covs.append(_trial_covariances(filtered))
        self.band_covs = np.stack(covs)                  # (B, T, C, C)
        self.stats = stat_feature_tensor(trials)          # (T, C, 19)

    def subset_features(self, channels: Sequence[int], fit_rows: np.ndarray) -> FeatureMatrix:
        """Features of all trials for a channel subset, with CSP fitted on
        fit_rows only. Single-channel subsets skip the CSP block."""
        channels = list(channels)
        ix = np.ix_(channels, channels)
        blocks = []
        names: list[str] = []
        if len(channels) >= 2:
            fit_labels = self.labels[fit_rows]
            for band, covs in zip(self.bands, self.band_covs):
                sub = covs[:, ix[0], ix[1]]
                csp = _csp_from_covs(sub[fit_rows], fit_labels)
                blocks.append(_csp_block(csp, sub))
                names.extend(
                    f"csp_{band[0]:g}_{band[1]:g}_f{j}" for j in range(N_CSP_FILTERS)
                )
        stats = self.stats[:, channels, :]
        blocks.append(stats.reshape(stats.shape[0], -1))
        for ch in channels:
            label = self.channel_names[ch] if self.channel_names else f"ch{ch}"
            names.extend(f"{label}_{feat}" for feat in STAT_FEATURE_NAMES)
        return FeatureMatrix(np.hstack(blocks), tuple(names))


def extract_features(
    train: TrialSet,
    test: TrialSet | None,
    bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
) -> tuple[FeatureMatrix, FeatureMatrix | None]:
    """FBCSP + statistics for already channel-restricted trial sets; CSP is
    fitted on the training set only."""
    parts_train = []
    parts_test = []
    if train.n_channels >= 2:
        model = fit_fbcsp(train, bands)
        parts_train.append(csp_features(model, train))
        if test is not None:
            parts_test.append(csp_features(model, test))
    parts_train.append(stat_features(train))
    fm_train = FeatureMatrix.hstack(parts_train)
    if test is None:
        return fm_train, None
    parts_test.append(stat_features(test))
    return fm_train, FeatureMatrix.hstack(parts_test)
