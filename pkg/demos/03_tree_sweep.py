"""Sweep the ensemble size until the accuracy curve flattens.

The ensemble grows one tree at a time on a fixed 90/10 split; the sweep
stops when consecutive sizes differ by less than epsilon.  Saves the
curve as a PNG next to this script.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from eegemotion import (
    EmotionLabel,
    IqrConfig,
    TrainConfig,
    clean_dataset,
    default_profile,
    synthetic_dataset,
    tree_count_sweep,
)

profile = default_profile()
ds = synthetic_dataset(profile, {lab: 4000 for lab in EmotionLabel}, seed=11)
cleaned, _ = clean_dataset(ds, IqrConfig())

result = tree_count_sweep(cleaned, TrainConfig(seed=5), epsilon=0.001, max_trees=60)
print("n_trees  accuracy")
for p in result.points:
    print(f"{p.n_trees:>7}  {p.accuracy:.4f}")
print(f"\nstopping rule fired at {result.chosen} trees"
      + (" (saturated at max_trees)" if result.saturated else ""))

out = Path(__file__).parent / "output"
out.mkdir(exist_ok=True)
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot([p.n_trees for p in result.points], [p.accuracy for p in result.points], marker="o")
ax.axvline(result.chosen, linestyle="--", color="tab:red", label=f"chosen = {result.chosen}")
ax.set_xlabel("number of trees")
ax.set_ylabel("holdout accuracy")
ax.set_title("Ensemble size sweep")
ax.legend()
fig.tight_layout()
fig.savefig(out / "tree_sweep.png", dpi=120)
print(f"curve saved to {out / 'tree_sweep.png'}")
