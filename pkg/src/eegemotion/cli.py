"""Batch command-line entry points for the full pipeline.

Exit codes: 0 success, 1 domain error (bad data or config), 2 usage error.
stdout carries machine-readable CSV, stderr carries human logs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading

from . import acquisition, cleaning, evaluation, realtime
from .core import CHANNEL_NAMES, Dataset, EmotionLabel, load_dataset, save_dataset
from .forest import TrainConfig, load_forest, save_forest, train

DISPLAY_NAMES = {
    EmotionLabel.HAPPY: "HAPPINESS",
    EmotionLabel.RELAXED: "RELAXATION",
    EmotionLabel.SAD: "SADNESS",
}


def format_mmss(t_s: float) -> str:
    total = int(round(t_s))
    return f"{total // 60}:{total % 60:02d}"


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=25, help="number of trees")
    p.add_argument("--features-per-split", type=int, default=3)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="parallel tree growth")


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        n_trees=args.trees,
        features_per_split=args.features_per_split,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )


def _load_profile(path: str | None) -> acquisition.SyntheticProfile:
    return acquisition.SyntheticProfile.load(path) if path else acquisition.default_profile()


def cmd_collect(args) -> int:
    if args.source == "replay":
        if not args.replay_in:
            print("collect: --replay-in is required with --source replay", file=sys.stderr)
            return 2
        ds = load_dataset(args.replay_in)
        rate = args.rate or acquisition.DEFAULT_RATE_HZ
        frames = list(acquisition.replay_source(ds, rate))
        out = Dataset.from_records(frames)
    else:
        profile = _load_profile(args.profile)
        if args.rate:
            profile = acquisition.SyntheticProfile(
                labels=profile.labels,
                means=profile.means,
                variances=profile.variances,
                rate_hz=args.rate,
                baseline_offset=profile.baseline_offset,
            )
        labels = list(EmotionLabel) if args.label == "all" else [EmotionLabel[args.label]]
        counts = {lab: args.frames for lab in labels}
        out = acquisition.synthetic_dataset(profile, counts, seed=args.seed, subject_id=args.subject)
    save_dataset(out, args.out)
    print(f"collect: wrote {len(out)} records to {args.out}", file=sys.stderr)
    return 0


def cmd_clean(args) -> int:
    ds = load_dataset(args.in_path)
    cfg = cleaning.IqrConfig(
        outlier_factor=args.outlier_factor,
        extreme_factor=args.extreme_factor,
        per_class=args.per_class,
    )
    cleaned, report = cleaning.clean_dataset(ds, cfg)
    save_dataset(cleaned, args.out)
    if args.report:
        report.to_csv(args.report)
    print("class,collected,outliers,total")
    for lab in report.collected:
        print(f"{lab.name},{report.collected[lab]},{report.outliers[lab]},{report.retained[lab]}")
    print(f"TOTAL,{report.total_collected},{report.total_outliers},{report.total_retained}")
    return 0


def cmd_train(args) -> int:
    ds = load_dataset(args.in_path)
    forest = train(ds, _train_config(args), n_jobs=args.jobs)
    save_forest(forest, args.out)
    print(f"train: {args.trees} trees on {len(ds)} records -> {args.out}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    ds = load_dataset(args.in_path)
    summary = evaluation.repeated_holdout(
        ds,
        _train_config(args),
        n_runs=args.runs,
        train_fraction=args.train_frac,
        base_seed=args.seed,
        n_jobs=args.jobs,
    )
    print("run,correct,incorrect,accuracy")
    for run in summary.runs:
        print(f"{run.run_index + 1},{run.correct},{run.incorrect},{run.accuracy:.6f}")
    print(f"mean_accuracy,{summary.mean_accuracy:.6f}")
    print(f"std_accuracy,{summary.std_accuracy:.6f}")
    if summary.normality is not None:
        print(f"shapiro_w,{summary.normality.statistic:.6f}")
        print(f"shapiro_p,{summary.normality.p_value:.6f}")
    else:
        print("shapiro_w,")
        print("shapiro_p,")
    if args.report:
        evaluation.write_holdout_csv(summary, args.report)
    if args.confusion:
        evaluation.write_confusion_csv(summary.labels, summary.mean_confusion, args.confusion)
    return 0


def cmd_pairwise(args) -> int:
    ds = load_dataset(args.in_path)
    results = evaluation.pairwise_models(
        ds,
        _train_config(args),
        subset_size=args.subset,
        n_runs=args.runs,
        base_seed=args.seed,
        n_jobs=args.jobs,
    )
    print("pair,mean_accuracy,std_accuracy,shapiro_p")
    for (a, b), summary in results.items():
        p = f"{summary.normality.p_value:.6f}" if summary.normality else ""
        print(f"{a.name}-{b.name},{summary.mean_accuracy:.6f},{summary.std_accuracy:.6f},{p}")
    return 0


def cmd_sweep(args) -> int:
    ds = load_dataset(args.in_path)
    result = evaluation.tree_count_sweep(
        ds,
        _train_config(args),
        epsilon=args.epsilon,
        max_trees=args.max_trees,
        train_fraction=args.train_frac,
    )
    if args.out:
        evaluation.write_sweep_csv(result.points, args.out)
    print("n_trees,accuracy")
    for p in result.points:
        print(f"{p.n_trees},{p.accuracy:.6f}")
    print(f"chosen,{result.chosen}")
    if result.saturated:
        print("saturated,true")
    return 0


def cmd_variance(args) -> int:
    ds = load_dataset(args.in_path)
    table = evaluation.variance_table(ds)
    if args.out:
        evaluation.write_variance_csv(table, args.out)
    print("class," + ",".join(CHANNEL_NAMES))
    for i, lab in enumerate(table.labels):
        print(f"{lab.name}," + ",".join(f"{v:.1f}" for v in table.values[i]))
    return 0


def cmd_simulate_session(args) -> int:
    forest = load_forest(args.model)
    cfg = realtime.SessionConfig(
        calibration_s=args.calibration,
        window_s=args.window,
        session_s=args.session,
        rate_hz=args.rate,
    )
    if args.source == "replay":
        if not args.replay_in:
            print("simulate-session: --replay-in is required with --source replay", file=sys.stderr)
            return 2
        ds = load_dataset(args.replay_in)
        source = acquisition.replay_source(ds, cfg.rate_hz)
    else:
        profile = _load_profile(args.profile)
        source = acquisition.synthetic_source(profile, EmotionLabel[args.label], seed=args.seed)
    flag = threading.Event()
    if args.stop_at is not None:
        source = realtime.StopAtSource(source, args.stop_at, flag)
    print("observation,class,accuracy,time")

    def sink(event: dict) -> None:
        if event["type"] == "prediction":
            label = EmotionLabel[event["label"]]
            print(
                f"{event['window_index']},{DISPLAY_NAMES[label]},"
                f"{round(event['confidence'] * 100)}%,{format_mmss(event['t_end_s'])}"
            )
        elif event["type"] == "state":
            print(f"state {event['state']} at t={event['t_s']:.1f}s", file=sys.stderr)

    log = realtime.run_session(source, forest, cfg, sink=sink, stop=flag)
    print(f"session ended: {log.stop_reason}, {len(log.predictions)} predictions", file=sys.stderr)
    if args.save_dir:
        os.makedirs(args.save_dir, exist_ok=True)
        if log.frames:
            save_dataset(Dataset.from_records(log.frames), f"{args.save_dir}/frames.csv")
        with open(f"{args.save_dir}/predictions.ndjson", "w", encoding="utf-8") as fh:
            for p in log.predictions:
                fh.write(json.dumps(p.to_json_dict()) + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, console_dir=args.console_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eegemotion", description="EEG emotion classification pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", help="generate a labeled CSV from a synthetic or replayed source")
    p.add_argument("--out", required=True)
    p.add_argument("--source", choices=["synthetic", "replay"], default="synthetic")
    p.add_argument("--label", default="all", choices=["all"] + [l.name for l in EmotionLabel])
    p.add_argument("--frames", type=int, default=1000, help="frames per label")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", default=None, help="profile JSON (default: packaged)")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--subject", default="synthetic")
    p.add_argument("--replay-in", default=None)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("clean", help="IQR-filter a dataset and report per-class outliers")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--outlier-factor", type=float, default=3.0)
    p.add_argument("--extreme-factor", type=float, default=6.0)
    p.add_argument("--per-class", action="store_true")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("train", help="train a random forest and save the model JSON")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("validate", help="repeated random holdout validation")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--report", default=None, help="write the run table CSV here")
    p.add_argument("--confusion", default=None, help="write the mean confusion CSV here")
    _add_train_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("pairwise", help="two-class models for each emotion pair")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--subset", type=int, default=250_000)
    p.add_argument("--runs", type=int, default=30)
    _add_train_flags(p)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("sweep", help="accuracy vs tree count until the curve flattens")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--max-trees", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.9)
    p.add_argument("--out", default=None)
    _add_train_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("variance", help="per-class per-channel variance grid")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_variance)

    p = sub.add_parser("simulate-session", help="headless real-time session on a replay/synthetic source")
    p.add_argument("--model", required=True)
    p.add_argument("--source", choices=["synthetic", "replay"], default="synthetic")
    p.add_argument("--replay-in", default=None)
    p.add_argument("--label", default="HAPPY", choices=[l.name for l in EmotionLabel])
    p.add_argument("--profile", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--calibration", type=float, default=30.0)
    p.add_argument("--window", type=float, default=10.0)
    p.add_argument("--session", type=float, default=300.0)
    p.add_argument("--rate", type=float, default=33.0)
    p.add_argument("--stop-at", type=float, default=None, help="operator stop at this logical time (s)")
    p.add_argument("--save-dir", default=None)
    p.set_defaults(func=cmd_simulate_session)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--console-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, realtime.CalibrationIncompleteError) as e:
        print(f"eegemotion {args.command}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
