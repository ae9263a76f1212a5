"""Train the forest and run the repeated-holdout validation protocol.

Prints the per-run results table, the averaged confusion matrix with
per-class accuracies, the normality test over run accuracies, and
one-vs-rest AUC per class.
"""

import numpy as np

from eegemotion import (
    EmotionLabel,
    IqrConfig,
    TrainConfig,
    auc_one_vs_rest,
    clean_dataset,
    default_profile,
    per_class_accuracy,
    random_split,
    repeated_holdout,
    synthetic_dataset,
    train,
)
from eegemotion.evaluation import ConfusionMatrix

profile = default_profile()
ds = synthetic_dataset(profile, {lab: 4000 for lab in EmotionLabel}, seed=7)
cleaned, _ = clean_dataset(ds, IqrConfig())
cfg = TrainConfig(n_trees=25, seed=1)

summary = repeated_holdout(cleaned, cfg, n_runs=10, base_seed=3)
print("run  correct  incorrect  accuracy")
for run in summary.runs:
    print(f"{run.run_index + 1:>3}  {run.correct:>7}  {run.incorrect:>9}  {run.accuracy:.4f}")
print(f"\nmean accuracy {summary.mean_accuracy:.4f}, std {summary.std_accuracy:.4f}")
if summary.normality:
    print(f"normality of run accuracies: W={summary.normality.statistic:.4f} "
          f"p={summary.normality.p_value:.4f}")

mean_cm = ConfusionMatrix(
    labels=summary.labels, counts=np.round(summary.mean_confusion).astype(np.int64)
)
acc = per_class_accuracy(mean_cm)
print("\naveraged confusion (rows = actual):")
header = "          " + "".join(f"{lab.name:>9}" for lab in summary.labels)
print(header + "   accuracy")
for i, lab in enumerate(summary.labels):
    cells = "".join(f"{int(v):>9}" for v in mean_cm.counts[i])
    print(f"{lab.name:<10}{cells}   {acc[lab]:.4f}")

# one-vs-rest AUC from forest vote fractions on a fresh split
train_ds, test_ds = random_split(cleaned, 0.9, seed=99)
forest = train(train_ds, cfg)
fractions = forest.vote_fractions(test_ds.values)
print("\none-vs-rest AUC:")
for lab in forest.labels:
    idx = forest.label_index(lab)
    positives = test_ds.label_codes == int(lab)
    print(f"  {lab.name:<8} {auc_one_vs_rest(fractions[:, idx], positives):.4f}")
