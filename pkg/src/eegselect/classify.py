"""Subset validation: stratified splitting and a linear-margin classifier.

The classifier minimizes L2-regularized hinge loss by deterministic
full-batch subgradient descent (Pegasos-style 1/(lambda*t) steps, bias
folded in as a constant column), with the regularization constant picked
from a grid by stratified 5-fold cross-validation. Deterministic given
(data, grid, seed).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .features import DEFAULT_BANDS, FeatureCache, FeatureMatrix, extract_features, mrmr_select
from .signal import TrialSet

__all__ = [
    "SplitSpec",
    "ClassifierModel",
    "SubsetAccuracy",
    "DEFAULT_C_GRID",
    "stratified_split",
    "split_indices",
    "train",
    "evaluate",
    "subset_accuracy",
    "subset_accuracy_cached",
]

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
TRAIN_EPOCHS = 200
CV_FOLDS = 5


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.2
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class ClassifierModel:
    """Linear decision function over standardized named columns."""

    columns: tuple[str, ...]
    weights: np.ndarray       # per column, plus trailing bias weight
    mean: np.ndarray
    std: np.ndarray
    c_value: float

    def decision(self, fm: FeatureMatrix) -> np.ndarray:
        if fm.columns != self.columns:
            raise ValueError("feature columns do not match the training schema")
        x = (fm.values - self.mean) / self.std
        return x @ self.weights[:-1] + self.weights[-1]


class SubsetAccuracy(NamedTuple):
    all_features: float
    selected_features: float
    n_selected: int


def split_indices(labels: np.ndarray, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (train_idx, test_idx) row indices."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        test_parts = []
        for cls in np.unique(labels):
            rows = np.flatnonzero(labels == cls)
            if rows.size < 2:
                raise ValueError(f"class {cls} has fewer than 2 trials")
            n_test = int(round(spec.test_fraction * rows.size))
            n_test = min(max(n_test, 1), rows.size - 1)
            test_parts.append(rng.permutation(rows)[:n_test])
        test_idx = np.sort(np.concatenate(test_parts))
    else:
        n_test = min(max(int(round(spec.test_fraction * labels.size)), 1), labels.size - 1)
        test_idx = np.sort(rng.permutation(labels.size)[:n_test])
    train_mask = np.ones(labels.size, dtype=bool)
    train_mask[test_idx] = False
    train_idx = np.flatnonzero(train_mask)
    for part, name in ((train_idx, "train"), (test_idx, "test")):
        if np.unique(labels[part]).size < 2:
            raise ValueError(f"{name} partition lost a class; use stratified splitting")
    return train_idx, test_idx


def stratified_split(trials: TrialSet, spec: SplitSpec) -> tuple[TrialSet, TrialSet]:
    """Disjoint (train, test) with per-class test proportions within one
    trial of the requested fraction."""
    train_idx, test_idx = split_indices(trials.labels, spec)
    return trials.select_trials(train_idx), trials.select_trials(test_idx)


def _fit_hinge(x: np.ndarray, y_pm: np.ndarray, c_value: float, epochs: int) -> np.ndarray:
    """Full-batch subgradient descent on lambda/2 ||w||^2 + mean hinge."""
    n, f = x.shape
    xb = np.hstack([x, np.ones((n, 1))])
    lam = 1.0 / (c_value * n)
    w = np.zeros(f + 1)
    for t in range(1, epochs + 1):
        margins = y_pm * (xb @ w)
        viol = margins < 1.0
        grad = lam * w - (y_pm[viol] @ xb[viol]) / n
        w -= grad / (lam * (t + 1))
    return w


def _standardize_fit(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def _cv_folds(labels: np.ndarray, n_folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Stratified folds: class rows are shuffled once and dealt round-robin."""
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in np.unique(labels):
        rows = rng.permutation(np.flatnonzero(labels == cls))
        for i, row in enumerate(rows):
            folds[i % n_folds].append(int(row))
    return [np.sort(np.array(f)) for f in folds]


def train(
    fm_train: FeatureMatrix,
    labels: np.ndarray,
    grid: Sequence[float] = DEFAULT_C_GRID,
    seed: int = 0,
    epochs: int = TRAIN_EPOCHS,
) -> ClassifierModel:
    """Grid-search the regularization constant by stratified 5-fold CV,
    then refit on the full training data."""
    labels = np.asarray(labels, dtype=np.int64)
    if fm_train.n_columns < 1:
        raise ValueError("need at least one feature column")
    if np.unique(labels).size < 2:
        raise ValueError("both classes must be present for training")
    y_pm = 2.0 * labels - 1.0

    best_c, best_acc = None, -1.0
    if len(grid) > 1:
        folds = _cv_folds(labels, CV_FOLDS, np.random.default_rng(seed))
        for c_value in grid:
            correct = 0
            for i, val_idx in enumerate(folds):
                fit_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
                mean, std = _standardize_fit(fm_train.values[fit_idx])
                x_fit = (fm_train.values[fit_idx] - mean) / std
                w = _fit_hinge(x_fit, y_pm[fit_idx], c_value, epochs)
                x_val = (fm_train.values[val_idx] - mean) / std
                pred = x_val @ w[:-1] + w[-1] > 0
                correct += int((pred == (labels[val_idx] == 1)).sum())
            acc = correct / labels.size
            if acc > best_acc:
                best_c, best_acc = c_value, acc
    else:
        best_c = grid[0]

    mean, std = _standardize_fit(fm_train.values)
    w = _fit_hinge((fm_train.values - mean) / std, y_pm, best_c, epochs)
    return ClassifierModel(
        columns=fm_train.columns, weights=w, mean=mean, std=std, c_value=float(best_c)
    )


def evaluate(model: ClassifierModel, fm_test: FeatureMatrix, labels: np.ndarray) -> float:
    """Fraction of correct sign predictions on the test rows."""
    labels = np.asarray(labels)
    pred = model.decision(fm_test) > 0
    return float((pred == (labels == 1)).mean())


def _accuracy_pair(
    fm_train: FeatureMatrix,
    fm_test: FeatureMatrix,
    y_train: np.ndarray,
    y_test: np.ndarray,
    grid: Sequence[float],
    n_selected: int,
    seed: int,
) -> SubsetAccuracy:
    model_all = train(fm_train, y_train, grid, seed=seed)
    acc_all = evaluate(model_all, fm_test, y_test)

    k = min(n_selected, fm_train.n_columns)
    picked = mrmr_select(fm_train, y_train, k=k).indices
    sel_train = fm_train.select_columns(picked)
    sel_test = fm_test.select_columns(picked)
    model_sel = train(sel_train, y_train, grid, seed=seed)
    acc_sel = evaluate(model_sel, sel_test, y_test)
    return SubsetAccuracy(acc_all, acc_sel, k)


def subset_accuracy(
    trials: TrialSet,
    mask: np.ndarray,
    spec: SplitSpec = SplitSpec(),
    bands: Sequence[tuple[float, float]] = DEFAULT_BANDS,
    grid: Sequence[float] = DEFAULT_C_GRID,
    n_selected: int = 10,
) -> SubsetAccuracy:
    """End-to-end accuracy of one channel subset: restrict channels, build
    FBCSP + statistical features, classify with (a) all columns and (b)
    the mRMR top-10."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("empty channel mask")
    restricted = trials.select_channels(np.flatnonzero(mask))
    train_set, test_set = stratified_split(restricted, spec)
    fm_train, fm_test = extract_features(train_set, test_set, bands)
    return _accuracy_pair(
        fm_train, fm_test, train_set.labels, test_set.labels, grid, n_selected, spec.seed
    )


def subset_accuracy_cached(
    cache: FeatureCache,
    mask: np.ndarray,
    train_idx: np.ndarray,
    test_idx: np.ndarray,
    grid: Sequence[float] = DEFAULT_C_GRID,
    n_selected: int = 10,
    seed: int = 0,
) -> SubsetAccuracy:
    """subset_accuracy against precomputed per-trial features."""
    channels = np.flatnonzero(np.asarray(mask, dtype=bool))
    if channels.size == 0:
        raise ValueError("empty channel mask")
    fm = cache.subset_features(channels, train_idx)
    return _accuracy_pair(
        fm.select_rows(train_idx),
        fm.select_rows(test_idx),
        cache.labels[train_idx],
        cache.labels[test_idx],
        grid,
        n_selected,
        seed,
    )


def make_channel_evaluator(
    cache: FeatureCache,
    rows: np.ndarray,
    n_selected: int = 10,
    c_value: float = 1.0,
    n_folds: int = CV_FOLDS,
    seed: int = 0,
    epochs: int = TRAIN_EPOCHS,
):
    """Cross-validated accuracy of a channel subset, for greedy selection.

    Runs the whole pipeline (CSP fit, mRMR, classifier) inside each fold of
    the given rows, with a single fixed regularization constant. Returns a
    callable channels -> accuracy.
    """
    rows = np.asarray(rows)
    labels = cache.labels[rows]
    folds = _cv_folds(labels, n_folds, np.random.default_rng(seed))

    def evaluate_channels(channels) -> float:
        channels = list(channels)
        correct = 0
        for i, val_pos in enumerate(folds):
            fit_pos = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
            fit_rows, val_rows = rows[fit_pos], rows[val_pos]
            fm = cache.subset_features(channels, fit_rows)
            fm_fit = fm.select_rows(fit_rows)
            fm_val = fm.select_rows(val_rows)
            y_fit = cache.labels[fit_rows]
            k = min(n_selected, fm.n_columns)
            picked = mrmr_select(fm_fit, y_fit, k=k).indices
            model = train(
                fm_fit.select_columns(picked), y_fit, grid=(c_value,), epochs=epochs
            )
            pred = model.decision(fm_val.select_columns(picked)) > 0
            correct += int((pred == (cache.labels[val_rows] == 1)).sum())
        return correct / rows.size

    return evaluate_channels
