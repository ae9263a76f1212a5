"""Validation protocol: repeated holdout, confusion analysis, AUC,
normality of run accuracies, the tree-count sweep, pairwise two-class
models, and per-class channel variance tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CHANNEL_NAMES, Dataset, EmotionLabel, LABELS, random_split, sample_subset
from .forest import Forest, TrainConfig, _training_arrays, grow_forest_tree, train
from .rng import derive_seed
from .swilk import NormalityResult, shapiro_wilk

__all__ = [
    "ConfusionMatrix",
    "HoldoutRun",
    "ValidationSummary",
    "SweepPoint",
    "SweepResult",
    "VarianceTable",
    "confusion",
    "per_class_accuracy",
    "auc_one_vs_rest",
    "repeated_holdout",
    "shapiro_wilk",
    "NormalityResult",
    "tree_count_sweep",
    "pairwise_models",
    "variance_table",
    "write_holdout_csv",
    "write_confusion_csv",
    "write_sweep_csv",
    "write_variance_csv",
]

_SWEEP_SPLIT_STREAM = 1 << 40  # outside any tree index, so streams never collide


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[actual][predicted] over an ordered label set."""

    labels: tuple[EmotionLabel, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.labels)
        if counts.shape != (k, k):
            raise ValueError("confusion matrix must be square over its labels")
        if (counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "labels", tuple(self.labels))

    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def total(self) -> int:
        return int(self.counts.sum())

    def overall_accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


def confusion(
    predictions: Sequence[EmotionLabel], actuals: Sequence[EmotionLabel], labels: Optional[Sequence[EmotionLabel]] = None
) -> ConfusionMatrix:
    if len(predictions) != len(actuals):
        raise ValueError("predictions and actuals differ in length")
    if len(actuals) == 0:
        raise ValueError("confusion of no samples")
    if labels is None:
        labels = sorted(set(actuals) | set(predictions))
    labels = tuple(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for a, p in zip(actuals, predictions):
        counts[pos[a], pos[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


def per_class_accuracy(m: ConfusionMatrix) -> dict[EmotionLabel, float]:
    """Row-normalized diagonal: fraction of each actual class predicted right."""
    sums = m.row_sums()
    if (sums == 0).any():
        empty = [m.labels[i].name for i in np.flatnonzero(sums == 0)]
        raise ValueError(f"no samples for class(es): {', '.join(empty)}")
    return {lab: float(m.counts[i, i] / sums[i]) for i, lab in enumerate(m.labels)}


def auc_one_vs_rest(scores, positives) -> float:
    """ROC area by the rank statistic; ties contribute one half.

    `scores` should be the classifier's score for the positive class
    (here: the forest's vote fraction).
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    if scores.shape != positives.shape or scores.ndim != 1:
        raise ValueError("scores and positives must be equal-length vectors")
    n_pos = int(positives.sum())
    n_neg = positives.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires at least one positive and one negative")
    ranks = _fractional_ranks(scores)
    rank_sum = float(ranks[positives].sum())
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _fractional_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(x, kind="mergesort")
    sx = x[order]
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class HoldoutRun:
    run_index: int
    seed: int
    correct: int
    incorrect: int
    accuracy: float
    confusion: ConfusionMatrix


@dataclass(frozen=True)
class ValidationSummary:
    runs: list[HoldoutRun]
    mean_accuracy: float
    std_accuracy: float
    mean_confusion: np.ndarray  # element-wise mean of run confusions (real-valued)
    labels: tuple[EmotionLabel, ...]
    normality: Optional[NormalityResult]  # None when run accuracies are constant


def _evaluate_split(forest: Forest, test: Dataset, labels: list[EmotionLabel]) -> ConfusionMatrix:
    pos = {lab: i for i, lab in enumerate(labels)}
    pred_idx = forest.predict_batch(test.values)
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    actual_idx = np.array([pos[EmotionLabel(int(c))] for c in test.label_codes], dtype=np.int64)
    forest_to_ds = np.array([pos[lab] for lab in forest.labels], dtype=np.int64)
    np.add.at(counts, (actual_idx, forest_to_ds[pred_idx]), 1)
    return ConfusionMatrix(labels=tuple(labels), counts=counts)


def repeated_holdout(
    ds: Dataset,
    cfg: TrainConfig = TrainConfig(),
    n_runs: int = 30,
    train_fraction: float = 0.9,
    base_seed: int = 0,
    n_jobs: int = 1,
) -> ValidationSummary:
    """n_runs independent random splits, one model per split.

    Run r splits with seed f(base_seed, 2r) and trains with seed
    f(base_seed, 2r+1); the whole summary is reproducible from base_seed.
    """
    if n_runs < 3:
        raise ValueError("n_runs must be >= 3 (normality test is undefined below 3)")
    if not ds.is_labeled():
        raise ValueError("validation requires a labeled dataset")
    labels = sorted(ds.class_counts().keys())
    runs = []
    for r in range(n_runs):
        split_seed = derive_seed(base_seed, 2 * r)
        train_seed = derive_seed(base_seed, 2 * r + 1)
        train_ds, test_ds = random_split(ds, train_fraction, split_seed)
        if len(test_ds) == 0 or len(train_ds) == 0:
            raise ValueError("dataset too small for the requested split")
        forest = train(train_ds, _with_seed(cfg, train_seed), n_jobs=n_jobs)
        cm = _evaluate_split(forest, test_ds, labels)
        correct = int(np.trace(cm.counts))
        total = cm.total()
        runs.append(
            HoldoutRun(
                run_index=r,
                seed=split_seed,
                correct=correct,
                incorrect=total - correct,
                accuracy=correct / total,
                confusion=cm,
            )
        )
    accs = np.array([run.accuracy for run in runs])
    mean_conf = np.mean([run.confusion.counts for run in runs], axis=0)
    normality = None
    if accs.max() > accs.min():
        normality = shapiro_wilk(accs)
    return ValidationSummary(
        runs=runs,
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std(ddof=1)),
        mean_confusion=mean_conf,
        labels=tuple(labels),
        normality=normality,
    )


def _with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return TrainConfig(
        n_trees=cfg.n_trees,
        features_per_split=cfg.features_per_split,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        seed=seed,
        bootstrap=cfg.bootstrap,
    )


@dataclass(frozen=True)
class SweepPoint:
    n_trees: int
    accuracy: float


@dataclass(frozen=True)
class SweepResult:
    points: list[SweepPoint]
    chosen: int
    saturated: bool  # True when the stopping rule never fired before max_trees


def tree_count_sweep(
    ds: Dataset,
    cfg: TrainConfig = TrainConfig(),
    epsilon: float = 0.001,
    max_trees: int = 100,
    train_fraction: float = 0.9,
) -> SweepResult:
    """Grow the ensemble one tree at a time on a fixed split until the
    accuracy difference between consecutive sizes drops below epsilon.

    Because tree t depends only on (cfg.seed, t), the ensemble at size n
    is exactly the first n trees of the forest `train` would build, and
    votes accumulate incrementally.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if max_trees < 1:
        raise ValueError("max_trees must be >= 1")
    if not ds.is_labeled():
        raise ValueError("sweep requires a labeled dataset")
    split_seed = derive_seed(cfg.seed, _SWEEP_SPLIT_STREAM)
    train_ds, test_ds = random_split(ds, train_fraction, split_seed)
    X, y, labels = _training_arrays(train_ds)
    pos = {int(lab): i for i, lab in enumerate(labels)}
    actual = np.array([pos[int(c)] for c in test_ds.label_codes], dtype=np.int64)

    votes = np.zeros((len(test_ds), len(labels)), dtype=np.int64)
    points: list[SweepPoint] = []
    prev_acc = None
    for t in range(max_trees):
        tree = grow_forest_tree(X, y, len(labels), cfg, t)
        single = Forest([tree], _single_tree_config(cfg), labels)
        votes += single.votes(test_ds.values)
        acc = float((np.argmax(votes, axis=1) == actual).mean())
        points.append(SweepPoint(n_trees=t + 1, accuracy=acc))
        if prev_acc is not None and abs(acc - prev_acc) < epsilon:
            return SweepResult(points=points, chosen=t + 1, saturated=False)
        prev_acc = acc
    return SweepResult(points=points, chosen=max_trees, saturated=True)


def _single_tree_config(cfg: TrainConfig) -> TrainConfig:
    return TrainConfig(
        n_trees=1,
        features_per_split=cfg.features_per_split,
        max_depth=cfg.max_depth,
        min_samples_leaf=cfg.min_samples_leaf,
        seed=cfg.seed,
        bootstrap=cfg.bootstrap,
    )


PAIR_ORDER = (
    (EmotionLabel.HAPPY, EmotionLabel.SAD),
    (EmotionLabel.HAPPY, EmotionLabel.RELAXED),
    (EmotionLabel.RELAXED, EmotionLabel.SAD),
)


def pairwise_models(
    ds: Dataset,
    cfg: TrainConfig = TrainConfig(),
    subset_size: int = 250_000,
    n_runs: int = 30,
    base_seed: int = 0,
    train_fraction: float = 0.9,
    n_jobs: int = 1,
) -> dict[tuple[EmotionLabel, EmotionLabel], ValidationSummary]:
    """Two-class holdout summaries for each emotion pair."""
    counts = ds.class_counts()
    out = {}
    for i, pair in enumerate(PAIR_ORDER):
        for lab in pair:
            if counts.get(lab, 0) == 0:
                raise ValueError(f"pair {pair[0].name}-{pair[1].name}: no {lab.name} records")
        mask = np.isin(ds.label_codes, [int(lab) for lab in pair])
        restricted = ds.take(np.flatnonzero(mask))
        take = min(subset_size, len(restricted))
        subset = sample_subset(restricted, take, seed=derive_seed(base_seed, 1000 + i))
        out[pair] = repeated_holdout(
            subset,
            cfg,
            n_runs=n_runs,
            train_fraction=train_fraction,
            base_seed=derive_seed(base_seed, 2000 + i),
            n_jobs=n_jobs,
        )
    return out


@dataclass(frozen=True)
class VarianceTable:
    """Sample variance per (class, channel), amplitude-squared units."""

    labels: tuple[EmotionLabel, ...]
    values: np.ndarray  # shape (len(labels), 14)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.labels), len(CHANNEL_NAMES)):
            raise ValueError("variance grid shape must be (labels, 14)")
        if (values < 0).any():
            raise ValueError("variances must be nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    def value(self, label: EmotionLabel, channel: int) -> float:
        return float(self.values[self.labels.index(label), int(channel)])


def variance_table(ds: Dataset) -> VarianceTable:
    """Per-class per-channel sample variance (n-1 divisor)."""
    if not ds.is_labeled():
        raise ValueError("variance table requires a labeled dataset")
    labels = sorted(ds.class_counts().keys())
    grid = np.empty((len(labels), len(CHANNEL_NAMES)), dtype=np.float64)
    for i, lab in enumerate(labels):
        mask = ds.label_codes == int(lab)
        n = int(mask.sum())
        if n < 2:
            raise ValueError(f"class {lab.name} has {n} record(s); need >= 2 for variance")
        grid[i] = ds.values[mask].var(axis=0, ddof=1)
    return VarianceTable(labels=tuple(labels), values=grid)


def write_holdout_csv(summary: ValidationSummary, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run,correct,incorrect,accuracy\n")
        for run in summary.runs:
            fh.write(f"{run.run_index + 1},{run.correct},{run.incorrect},{run.accuracy:.6f}\n")


def write_confusion_csv(labels: Sequence[EmotionLabel], matrix: np.ndarray, path) -> None:
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("class," + ",".join(lab.name for lab in labels) + ",accuracy\n")
        for i, lab in enumerate(labels):
            row = matrix[i]
            acc = row[i] / row.sum() if row.sum() else float("nan")
            cells = ",".join(_fmt_count(v) for v in row)
            fh.write(f"{lab.name},{cells},{acc:.4f}\n")


def _fmt_count(v) -> str:
    f = float(v)
    return str(int(f)) if f == int(f) else f"{f:.2f}"


def write_sweep_csv(points: Sequence[SweepPoint], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n_trees,accuracy\n")
        for p in points:
            fh.write(f"{p.n_trees},{p.accuracy:.6f}\n")


def write_variance_csv(table: VarianceTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("class," + ",".join(CHANNEL_NAMES) + "\n")
        for i, lab in enumerate(table.labels):
            cells = ",".join(repr(float(v)) for v in table.values[i])
            fh.write(f"{lab.name},{cells}\n")
