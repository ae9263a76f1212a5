"""Run a headless real-time session and compare variances afterwards.

A synthetic HAPPY stream replays in logical time: ~30 s calibration, then
one majority-vote prediction per 10 s window for 5 minutes.  The printed
log mirrors the operator display (class, confidence, m:ss).
"""

import numpy as np

from eegemotion import (
    EmotionLabel,
    IqrConfig,
    SessionConfig,
    TrainConfig,
    VarianceTable,
    clean_dataset,
    compare_session_variance,
    default_profile,
    run_session,
    synthetic_dataset,
    synthetic_source,
    train,
)
from eegemotion.cli import DISPLAY_NAMES, format_mmss

profile = default_profile()
corpus = synthetic_dataset(profile, {lab: 4000 for lab in EmotionLabel}, seed=3)
cleaned, _ = clean_dataset(corpus, IqrConfig())
forest = train(cleaned, TrainConfig(n_trees=25, seed=8))

source = synthetic_source(profile, EmotionLabel.HAPPY, seed=77)
print("observation  class       confidence  time")

def sink(event):
    if event["type"] == "prediction":
        label = EmotionLabel[event["label"]]
        print(f"{event['window_index']:>11}  {DISPLAY_NAMES[label]:<10}  "
              f"{event['confidence'] * 100:>8.0f}%  {format_mmss(event['t_end_s'])}")

log = run_session(source, forest, SessionConfig(), sink=sink)
print(f"\nsession {log.stop_reason}: {len(log.predictions)} windows, "
      f"{len(log.frames)} frames consumed")

model_table = VarianceTable(labels=profile.labels, values=profile.variances)
report = compare_session_variance(log, model_table)
print("\nmodel vs session variance (HAPPY, first 7 channels):")
for c in range(7):
    print(f"  {report.model[0, c]:>10.0f}  vs  {report.session[0, c]:>10.0f}"
          f"   ratio {report.ratio[0, c]:.3f}")
