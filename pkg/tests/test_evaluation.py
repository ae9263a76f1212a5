import numpy as np
import pytest

from eegemotion.core import Dataset, EmotionLabel
from eegemotion.evaluation import (
    ConfusionMatrix,
    PAIR_ORDER,
    VarianceTable,
    _SWEEP_SPLIT_STREAM,
    auc_one_vs_rest,
    confusion,
    pairwise_models,
    per_class_accuracy,
    repeated_holdout,
    tree_count_sweep,
    variance_table,
    write_confusion_csv,
    write_holdout_csv,
    write_sweep_csv,
    write_variance_csv,
)
from eegemotion.forest import TrainConfig, train
from eegemotion.core import random_split
from eegemotion.rng import Rng, derive_seed
from eegemotion.swilk import shapiro_wilk
from testutil import column_dataset, make_dataset

H, R, S = EmotionLabel.HAPPY, EmotionLabel.RELAXED, EmotionLabel.SAD


# ---- confusion ----

def test_confusion_diagonal_when_perfect():
    labs = [H, R, S, H, R, S]
    m = confusion(labs, labs)
    assert np.array_equal(m.counts, np.diag([2, 2, 2]))


def test_confusion_direct_count():
    m = confusion([S, S, S], [H, H, H], labels=[H, R, S])
    assert m.counts[0, 2] == 3
    assert m.counts.sum() == 3


def test_confusion_row_sums_match_actual_counts():
    rng = np.random.default_rng(1)
    actuals = [EmotionLabel(int(i)) for i in rng.integers(0, 3, 100)]
    predictions = [EmotionLabel(int(i)) for i in rng.integers(0, 3, 100)]
    m = confusion(predictions, actuals, labels=[H, R, S])
    # brute-force tally
    for i, lab in enumerate([H, R, S]):
        assert m.row_sums()[i] == sum(1 for a in actuals if a == lab)
    for i, a in enumerate([H, R, S]):
        for j, p in enumerate([H, R, S]):
            want = sum(1 for x, y in zip(actuals, predictions) if x == a and y == p)
            assert m.counts[i, j] == want


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion([H], [H, S])
    with pytest.raises(ValueError):
        confusion([], [])


TABLE6 = np.array([[24303, 206, 491], [5000, 17610, 400], [5766, 224, 19011]])


def test_per_class_accuracy_published_matrix():
    m = ConfusionMatrix(labels=(H, R, S), counts=TABLE6)
    acc = per_class_accuracy(m)
    assert acc[H] == pytest.approx(0.9721, abs=5e-5)
    assert acc[R] == pytest.approx(0.7653, abs=5e-5)
    assert acc[S] == pytest.approx(0.7604, abs=5e-5)


def test_per_class_accuracy_empty_row():
    m = ConfusionMatrix(labels=(H, R), counts=np.array([[3, 0], [0, 0]]))
    with pytest.raises(ValueError, match="RELAXED"):
        per_class_accuracy(m)


def test_overall_accuracy_is_trace_over_total():
    m = ConfusionMatrix(labels=(H, R, S), counts=TABLE6)
    assert m.overall_accuracy() == pytest.approx(np.trace(TABLE6) / TABLE6.sum())


# ---- AUC ----

# expected values frozen from an established reference implementation
AUC_FIXTURES = [
    ([0.9, 0.8, 0.7, 0.3, 0.2, 0.1], [1, 1, 1, 0, 0, 0], 1.0),
    ([0.9, 0.3, 0.7, 0.8, 0.2, 0.1], [1, 1, 1, 0, 0, 0], 0.7777777777777779),
    ([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0], 0.5),
    ([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1], 0.75),
    ([0.2, 0.2, 0.6, 0.6, 0.6, 0.9], [0, 1, 0, 0, 1, 1], 0.6111111111111112),
    ([0.11, 0.84, 0.46, 0.32, 0.6, 0.6, 0.42, 0.7, 0.13, 0.95], [0, 1, 0, 0, 1, 0, 1, 1, 0, 1], 0.9),
]


@pytest.mark.parametrize("scores,positives,expected", AUC_FIXTURES)
def test_auc_reference_fixtures(scores, positives, expected):
    assert auc_one_vs_rest(scores, np.array(positives, bool)) == pytest.approx(expected, abs=1e-9)


def _auc_pair_counting(scores, positives):
    """Independent oracle: count concordant pairs, ties worth one half."""
    pos = [s for s, p in zip(scores, positives) if p]
    neg = [s for s, p in zip(scores, positives) if not p]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (len(pos) * len(neg))


def test_auc_matches_pair_counting_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(2, 30))
        scores = rng.integers(0, 6, n) / 5.0  # coarse grid forces ties
        positives = rng.integers(0, 2, n).astype(bool)
        if positives.all() or not positives.any():
            continue
        assert auc_one_vs_rest(scores, positives) == pytest.approx(
            _auc_pair_counting(scores, positives), abs=1e-12
        )


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(4)
    scores = rng.uniform(0, 1, 40)
    positives = rng.integers(0, 2, 40).astype(bool)
    positives[0] = True
    positives[1] = False
    base = auc_one_vs_rest(scores, positives)
    assert auc_one_vs_rest(np.exp(5 * scores), positives) == pytest.approx(base)
    assert auc_one_vs_rest(scores**3 + 7, positives) == pytest.approx(base)


def test_auc_single_class_error():
    with pytest.raises(ValueError):
        auc_one_vs_rest([0.1, 0.2], [True, True])


# ---- repeated holdout ----

def _separable_dataset(n_per=40, seed=0):
    rng = np.random.default_rng(seed)
    chunks, labels = [], []
    for c, mean in enumerate((0.0, 100.0, 200.0)):
        chunks.append(rng.normal(mean, 1.0, (n_per, 14)))
        labels.extend([c] * n_per)
    return make_dataset(np.vstack(chunks), labels)


def test_repeated_holdout_separable_dataset():
    ds = _separable_dataset()
    summary = repeated_holdout(ds, TrainConfig(n_trees=3, seed=0), n_runs=5, base_seed=1)
    assert len(summary.runs) == 5
    assert all(run.accuracy == 1.0 for run in summary.runs)
    assert summary.mean_accuracy == 1.0
    assert summary.std_accuracy == 0.0
    assert summary.normality is None  # constant accuracies: test undefined


def test_repeated_holdout_run_shape_and_arithmetic():
    ds = _noisy_dataset()
    summary = repeated_holdout(ds, TrainConfig(n_trees=3, seed=0), n_runs=4, base_seed=9)
    for i, run in enumerate(summary.runs):
        assert run.run_index == i
        assert run.accuracy == pytest.approx(run.correct / (run.correct + run.incorrect))
        assert run.correct + run.incorrect == len(ds) - round(0.9 * len(ds))
        assert run.confusion.total() == run.correct + run.incorrect
    mean = np.mean([r.confusion.counts for r in summary.runs], axis=0)
    assert np.allclose(summary.mean_confusion, mean)


def _noisy_dataset(n_per=60, seed=3):
    rng = np.random.default_rng(seed)
    chunks, labels = [], []
    for c, mean in enumerate((0.0, 0.5, 1.0)):
        chunks.append(rng.normal(mean, 1.0, (n_per, 14)))
        labels.extend([c] * n_per)
    return make_dataset(np.vstack(chunks), labels)


def test_repeated_holdout_deterministic():
    ds = _noisy_dataset()
    cfg = TrainConfig(n_trees=3, seed=2)
    a = repeated_holdout(ds, cfg, n_runs=3, base_seed=7)
    b = repeated_holdout(ds, cfg, n_runs=3, base_seed=7)
    assert [r.accuracy for r in a.runs] == [r.accuracy for r in b.runs]
    assert np.array_equal(a.mean_confusion, b.mean_confusion)
    if a.normality is not None:
        assert a.normality == b.normality


def test_repeated_holdout_too_few_runs():
    with pytest.raises(ValueError):
        repeated_holdout(_separable_dataset(), TrainConfig(), n_runs=2)


# ---- sweep ----

def test_sweep_trivially_separable_stops_at_two():
    ds = _separable_dataset(n_per=50, seed=1)
    result = tree_count_sweep(ds, TrainConfig(seed=0), epsilon=0.001, max_trees=20)
    assert result.chosen == 2  # accuracy 1.0 at n=1 and n=2
    assert not result.saturated
    assert [p.n_trees for p in result.points] == [1, 2]
    assert all(p.accuracy == 1.0 for p in result.points)


def test_sweep_saturation_flag():
    ds = _noisy_dataset(n_per=50, seed=5)
    result = tree_count_sweep(ds, TrainConfig(seed=4), epsilon=1e-12, max_trees=4)
    assert result.saturated
    assert result.chosen == 4
    assert len(result.points) == 4


def test_sweep_points(tmp_path):
    ds = _noisy_dataset(n_per=40, seed=6)
    result = tree_count_sweep(ds, TrainConfig(seed=1), epsilon=0.5, max_trees=10)
    write_sweep_csv(result.points, tmp_path / "sweep.csv")
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "n_trees,accuracy"
    assert len(lines) == len(result.points) + 1


def test_sweep_epsilon_validation():
    with pytest.raises(ValueError):
        tree_count_sweep(_separable_dataset(), TrainConfig(), epsilon=0.0)


def test_sweep_prefix_matches_full_training():
    # ensemble at size n is the first n trees train() would build
    ds = _noisy_dataset(n_per=40, seed=7)
    cfg = TrainConfig(n_trees=3, seed=11)
    result = tree_count_sweep(ds, cfg, epsilon=1e-12, max_trees=3)
    split_seed = derive_seed(cfg.seed, _SWEEP_SPLIT_STREAM)
    train_ds, test_ds = random_split(ds, 0.9, split_seed)
    forest = train(train_ds, cfg)
    pos = {int(lab): i for i, lab in enumerate(forest.labels)}
    actual = np.array([pos[int(c)] for c in test_ds.label_codes])
    acc = (forest.predict_batch(test_ds.values) == actual).mean()
    assert result.points[-1].accuracy == pytest.approx(float(acc), abs=1e-12)


# ---- pairwise ----

def test_pairwise_emits_three_pairs_in_order():
    ds = _noisy_dataset(n_per=50, seed=8)
    out = pairwise_models(ds, TrainConfig(n_trees=3, seed=0), subset_size=60, n_runs=3, base_seed=5)
    assert list(out.keys()) == [(H, S), (H, R), (R, S)]
    for summary in out.values():
        assert set(summary.labels) <= {H, R, S}
        assert len(summary.labels) == 2


def test_pairwise_split_sizes_published_arithmetic():
    # 250,000 two-class records -> 225,000 train / 25,000 validate per run;
    # constant values make every tree a bare leaf, so this stays instant
    n = 130_000
    values = np.zeros((3 * n, 14))
    codes = np.repeat(np.array([0, 1, 2], dtype=np.int8), n)
    ds = Dataset(values, codes, np.arange(3 * n, dtype=np.int64), ["s"] * (3 * n))
    out = pairwise_models(
        ds, TrainConfig(n_trees=1, seed=0), subset_size=250_000, n_runs=3, base_seed=0
    )
    run = out[(H, S)].runs[0]
    assert run.correct + run.incorrect == 25_000


def test_pairwise_missing_class_error():
    ds = make_dataset(np.zeros((10, 14)), [0] * 10)
    with pytest.raises(ValueError):
        pairwise_models(ds, TrainConfig(n_trees=1, seed=0), subset_size=10, n_runs=3)


# ---- variance ----

def test_variance_constant_channel_is_zero():
    ds = column_dataset([5.0, 5.0, 5.0, 5.0], [0, 0, 0, 0], fill=3.0)
    table = variance_table(ds)
    assert table.values.max() == 0.0


def test_variance_hand_computed():
    ds = column_dataset([2, 4, 4, 4, 5, 5, 7, 9], [1] * 8)
    table = variance_table(ds)
    assert table.value(R, 0) == pytest.approx(32 / 7)


def test_variance_published_grid_fixture():
    from eegemotion.acquisition import default_profile

    profile = default_profile()
    table = VarianceTable(labels=profile.labels, values=profile.variances)
    assert table.value(H, 0) == 226269  # Happiness, AF3
    assert table.value(R, 3) == 5281
    assert table.value(S, 13) == 23377


def test_variance_requires_two_records_per_class():
    ds = column_dataset([1.0, 2.0, 3.0], [0, 0, 1])
    with pytest.raises(ValueError, match="RELAXED"):
        variance_table(ds)


def test_variance_translation_and_scaling_invariants():
    rng = np.random.default_rng(12)
    values = rng.normal(0, 3, (60, 14))
    labels = rng.integers(0, 3, 60)
    labels[:3] = [0, 1, 2]
    labels[3:6] = [0, 1, 2]
    base = variance_table(make_dataset(values, labels))
    shifted = variance_table(make_dataset(values + 1234.5, labels))
    scaled = variance_table(make_dataset(values * 3.0, labels))
    assert np.allclose(shifted.values, base.values, rtol=1e-9, atol=1e-8)
    assert np.allclose(scaled.values, 9.0 * base.values, rtol=1e-9)


# ---- shapiro-wilk ----

# expected values frozen from an established reference implementation
SW_FIXTURES = [
    ([148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236], 0.7888146948631716, 0.006703814061898823),
    (
        [38.464, 57.631, 61.623, 47.058, 41.961, 53.934, 44.834, 45.894, 52.685, 44.707,
         45.258, 51.429, 43.598, 46.868, 53.031, 41.813, 43.741, 37.814, 50.201, 59.499,
         54.495, 50.378, 65.228, 50.802, 46.298, 56.853, 47.945, 46.508, 53.947, 42.284],
        0.9725400522981152, 0.6107536749600192,
    ),
    (
        [-3.672, -4.122, -3.956, -4.288, -4.171, -4.184, -4.762, -3.817, -3.782, -3.626,
         -3.829, -3.718, -4.089, -3.749, -4.325, 4.103, 4.344, 4.059, 3.65, 3.488,
         3.835, 3.776, 4.119, 3.42, 4.267, 3.998, 4.302, 3.539, 3.711, 3.919],
        0.7055017474633172, 1.877882212814907e-06,
    ),
    (
        [4.225, 0.241, 5.742, 0.74, 3.915, 4.669, 0.252, 0.296, 1.464, 1.375,
         0.684, 0.78, 1.392, 1.216, 4.549, 0.547, 0.066, 0.39, 2.693, 1.677],
        0.8334398946618955, 0.0028489343865485835,
    ),
    ([1.0, 2.0, 3.5, 7.0], 0.9244190472280267, 0.5619989745066833),
    ([2.0, 3.1, 4.7, 5.2, 9.9], 0.9020593597750782, 0.42137215979046033),
]


@pytest.mark.parametrize("xs,w_expected,p_expected", SW_FIXTURES)
def test_shapiro_reference_fixtures(xs, w_expected, p_expected):
    result = shapiro_wilk(xs)
    assert result.statistic == pytest.approx(w_expected, abs=1e-4)
    assert result.p_value == pytest.approx(p_expected, abs=1e-4)
    assert 0 < result.statistic <= 1


def test_shapiro_normal_draws_do_not_reject():
    r = Rng(3)
    xs = [r.normal(0.0, 1.0) for _ in range(30)]
    assert shapiro_wilk(xs).p_value > 0.05


def test_shapiro_bimodal_rejects():
    r = Rng(7)
    xs = [r.normal(-5.0, 0.3) for _ in range(15)] + [r.normal(5.0, 0.3) for _ in range(15)]
    assert shapiro_wilk(xs).p_value < 0.05


def test_shapiro_domain_errors():
    with pytest.raises(ValueError):
        shapiro_wilk([1.0, 2.0])
    with pytest.raises(ValueError):
        shapiro_wilk([3.0] * 30)
    with pytest.raises(ValueError):
        shapiro_wilk(list(range(5001)))


# ---- csv writers ----

def test_holdout_csv(tmp_path):
    ds = _separable_dataset(n_per=20, seed=2)
    summary = repeated_holdout(ds, TrainConfig(n_trees=3, seed=0), n_runs=3, base_seed=2)
    path = tmp_path / "runs.csv"
    write_holdout_csv(summary, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "run,correct,incorrect,accuracy"
    assert len(lines) == 4


def test_confusion_csv(tmp_path):
    path = tmp_path / "confusion.csv"
    write_confusion_csv((H, R, S), TABLE6, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("class,HAPPY,RELAXED,SAD")
    assert lines[1] == "HAPPY,24303,206,491,0.9721"


def test_variance_csv_round_trip(tmp_path):
    from eegemotion.acquisition import default_profile

    profile = default_profile()
    table = VarianceTable(labels=profile.labels, values=profile.variances)
    path = tmp_path / "variance.csv"
    write_variance_csv(table, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("class,AF3")
    assert lines[1].split(",")[1] == "226269.0"
