import numpy as np
import pytest

from eegemotion.core import EmotionLabel, N_CHANNELS
from eegemotion.forest import (
    DecisionTree,
    Forest,
    Leaf,
    Split,
    TrainConfig,
    best_split,
    gini,
    grow_tree,
    grow_tree_reference,
    load_forest,
    save_forest,
    train,
)
from eegemotion.rng import Rng
from testutil import make_dataset, stub_forest


def test_gini_values():
    assert gini([10, 0, 0]) == 0.0
    assert gini([5, 5, 0]) == 0.5
    assert gini([4, 4, 4]) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        gini([0, 0, 0])


def test_train_config_validation():
    TrainConfig()
    with pytest.raises(ValueError):
        TrainConfig(n_trees=0)
    with pytest.raises(ValueError):
        TrainConfig(features_per_split=0)
    with pytest.raises(ValueError):
        TrainConfig(features_per_split=15)
    with pytest.raises(ValueError):
        TrainConfig(min_samples_leaf=0)


def _xy(pairs, n_channels=N_CHANNELS):
    X = np.zeros((len(pairs), n_channels))
    y = np.empty(len(pairs), dtype=np.int64)
    for i, (v, lab) in enumerate(pairs):
        X[i, 0] = v
        y[i] = lab
    return X, y


def test_best_split_pure_returns_none():
    X, y = _xy([(1.0, 0), (2.0, 0), (3.0, 0)])
    assert best_split(X, y, range(14), n_labels=3) is None


def test_best_split_simple_separable():
    X, y = _xy([(1.0, 0), (3.0, 1)])
    choice = best_split(X, y, range(14), n_labels=2)
    assert choice.channel == 0
    assert choice.threshold == 2.0
    assert choice.impurity_decrease == pytest.approx(0.5)


def test_best_split_no_distinct_values():
    X = np.ones((4, 14))
    y = np.array([0, 1, 0, 1])
    assert best_split(X, y, range(14), n_labels=2) is None


def test_best_split_respects_min_samples_leaf():
    X, y = _xy([(1.0, 0), (2.0, 0), (3.0, 1), (4.0, 1)])
    assert best_split(X, y, [0], min_samples_leaf=2, n_labels=2).threshold == 2.5
    assert best_split(X, y, [0], min_samples_leaf=3, n_labels=2) is None


def _brute_force_best(X, y, channels, n_labels, min_leaf=1):
    """Independent oracle: enumerate every (channel, midpoint) split."""
    m = len(y)
    parent_counts = [int((y == c).sum()) for c in range(n_labels)]
    if max(parent_counts) == m:
        return None
    parent_gini = 1.0 - sum((c / m) ** 2 for c in parent_counts)
    best = None
    for ch in sorted(channels):
        distinct = sorted(set(X[:, ch]))
        for lo, hi in zip(distinct, distinct[1:]):
            t = (lo + hi) * 0.5
            left = y[X[:, ch] <= t]
            right = y[X[:, ch] > t]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            gl = 1.0 - sum((np.sum(left == c) / len(left)) ** 2 for c in range(n_labels))
            gr = 1.0 - sum((np.sum(right == c) / len(right)) ** 2 for c in range(n_labels))
            decrease = parent_gini - (len(left) * gl + len(right) * gr) / m
            if best is None or decrease > best[0] + 1e-12:
                best = (decrease, ch, t)
    return best


def test_best_split_matches_brute_force_enumeration():
    rng = np.random.default_rng(123)
    for trial in range(300):
        m = int(rng.integers(2, 13))
        n_channels = int(rng.integers(1, 3))
        n_labels = int(rng.integers(2, 4))
        X = np.zeros((m, N_CHANNELS))
        X[:, :n_channels] = rng.integers(0, 5, (m, n_channels)).astype(float)
        y = rng.integers(0, n_labels, m).astype(np.int64)
        channels = list(range(n_channels))
        got = best_split(X, y, channels, n_labels=n_labels)
        want = _brute_force_best(X, y, channels, n_labels)
        if want is None:
            assert got is None
        else:
            assert got is not None
            assert got.impurity_decrease == pytest.approx(want[0], abs=1e-12)
            assert (got.channel, got.threshold) == (want[1], want[2])


def test_grow_tree_single_sample():
    X = np.zeros((1, 14))
    y = np.array([2], dtype=np.int64)
    tree = grow_tree(X, y, TrainConfig(seed=0), Rng(0), n_labels=3)
    assert tree.n_nodes == 1
    assert tree.counts[0].tolist() == [0, 0, 1]


def test_grow_tree_depth_zero_is_leaf():
    X = np.random.default_rng(0).normal(0, 1, (20, 14))
    y = np.random.default_rng(1).integers(0, 3, 20).astype(np.int64)
    tree = grow_tree(X, y, TrainConfig(max_depth=0, seed=0), Rng(0), n_labels=3)
    assert tree.n_nodes == 1
    assert tree.counts[0].sum() == 20


def test_grow_tree_separable_is_exact():
    # three clusters separated on channel 0; all-features greedy CART nails it
    rng = np.random.default_rng(3)
    X = np.zeros((30, 14))
    X[:10, 0] = rng.uniform(0, 1, 10)
    X[10:20, 0] = rng.uniform(10, 11, 10)
    X[20:, 0] = rng.uniform(20, 21, 10)
    y = np.repeat([0, 1, 2], 10).astype(np.int64)
    tree = grow_tree(X, y, TrainConfig(features_per_split=14, seed=0), Rng(0), n_labels=3)
    labels = tree.leaf_labels()
    predictions = [labels[tree.predict_leaf(X[i])] for i in range(30)]
    assert predictions == y.tolist()


def test_grow_tree_kernel_matches_reference():
    rng = np.random.default_rng(42)
    for trial in range(25):
        m = int(rng.integers(2, 250))
        n_labels = int(rng.integers(2, 4))
        X = rng.normal(0, 1, (m, 14)).round(int(rng.integers(0, 3)))
        y = rng.integers(0, n_labels, m).astype(np.int64)
        cfg = TrainConfig(
            features_per_split=int(rng.integers(1, 15)),
            max_depth=None if trial % 3 else int(rng.integers(0, 6)),
            min_samples_leaf=int(rng.integers(1, 4)),
            seed=trial,
        )
        fast = grow_tree(X, y, cfg, Rng(trial), n_labels=n_labels)
        ref = grow_tree_reference(X, y, cfg, Rng(trial), n_labels=n_labels)
        assert fast.equals(ref), f"trial {trial}"


def _toy_dataset(n=400, seed=0):
    rng = np.random.default_rng(seed)
    means = {0: -2.0, 1: 0.0, 2: 2.0}
    X = np.vstack([rng.normal(means[c], 1.0, (n // 3 + 1, 14))[: n // 3] for c in range(3)])
    labels = np.repeat([0, 1, 2], n // 3)
    return make_dataset(X, labels)


def test_train_tree_count_and_labels():
    forest = train(_toy_dataset(), TrainConfig(n_trees=25, seed=1))
    assert len(forest.trees) == 25
    assert forest.labels == [EmotionLabel.HAPPY, EmotionLabel.RELAXED, EmotionLabel.SAD]


def test_train_single_class_dataset():
    ds = make_dataset(np.random.default_rng(0).normal(0, 1, (30, 14)), [EmotionLabel.SAD] * 30)
    forest = train(ds, TrainConfig(n_trees=5, seed=0))
    probe = np.random.default_rng(1).normal(0, 1, 14)
    pred = forest.predict(probe)
    assert pred.label is EmotionLabel.SAD
    assert pred.vote_fractions[EmotionLabel.SAD] == 1.0


def test_train_empty_or_unlabeled_errors():
    from eegemotion.core import Dataset

    with pytest.raises(ValueError):
        train(Dataset.empty(), TrainConfig())
    with pytest.raises(ValueError):
        train(make_dataset(np.zeros((5, 14)), None), TrainConfig())


def test_train_deterministic_and_parallel_identical():
    ds = _toy_dataset(n=600, seed=5)
    cfg = TrainConfig(n_trees=8, seed=9)
    serial = train(ds, cfg, n_jobs=1)
    again = train(ds, cfg, n_jobs=1)
    parallel = train(ds, cfg, n_jobs=4)
    probes = np.random.default_rng(11).normal(0, 1, (1000, 14))
    assert np.array_equal(serial.votes(probes), again.votes(probes))
    assert np.array_equal(serial.votes(probes), parallel.votes(probes))
    for a, b in zip(serial.trees, parallel.trees):
        assert a.equals(b)


def test_training_set_consistency_without_bootstrap():
    rng = np.random.default_rng(21)
    X = rng.normal(0, 1, (200, 14))  # continuous, so no duplicate feature vectors
    y = rng.integers(0, 3, 200)
    ds = make_dataset(X, y)
    cfg = TrainConfig(n_trees=1, features_per_split=14, bootstrap=False, seed=0)
    forest = train(ds, cfg)
    assert (forest.predict_batch(X) == y).all()


def test_predict_unanimous():
    forest = stub_forest({EmotionLabel.HAPPY: 25}, labels=list(EmotionLabel))
    pred = forest.predict(np.zeros(14))
    assert pred.label is EmotionLabel.HAPPY
    assert pred.vote_fractions[EmotionLabel.HAPPY] == 1.0


def test_predict_vote_arithmetic():
    forest = stub_forest(
        {EmotionLabel.HAPPY: 13, EmotionLabel.RELAXED: 6, EmotionLabel.SAD: 6},
        labels=list(EmotionLabel),
    )
    pred = forest.predict(np.zeros(14))
    assert pred.label is EmotionLabel.HAPPY
    assert pred.vote_fractions[EmotionLabel.HAPPY] == pytest.approx(0.52)


def test_predict_tie_break_canonical():
    forest = stub_forest({EmotionLabel.RELAXED: 5, EmotionLabel.SAD: 5}, labels=list(EmotionLabel))
    assert forest.predict(np.zeros(14)).label is EmotionLabel.RELAXED


def test_vote_fractions_sum_to_one():
    ds = _toy_dataset(n=300, seed=2)
    forest = train(ds, TrainConfig(n_trees=7, seed=3))
    probes = np.random.default_rng(5).normal(0, 2, (50, 14))
    sums = forest.vote_fractions(probes).sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-9)


def test_forest_json_round_trip(tmp_path):
    ds = _toy_dataset(n=150, seed=7)
    forest = train(ds, TrainConfig(n_trees=3, seed=4, max_depth=5))
    path = tmp_path / "model.json"
    save_forest(forest, path)
    back = load_forest(path)
    assert back.config == forest.config
    assert back.labels == forest.labels
    for a, b in zip(forest.trees, back.trees):
        assert a.equals(b)
    probes = np.random.default_rng(0).normal(0, 2, (100, 14))
    assert np.array_equal(forest.votes(probes), back.votes(probes))


def test_load_forest_validations(tmp_path):
    ds = _toy_dataset(n=60, seed=8)
    forest = train(ds, TrainConfig(n_trees=2, seed=1, max_depth=2))
    path = tmp_path / "model.json"
    save_forest(forest, path)
    import json

    doc = json.loads(path.read_text())

    bad = dict(doc, format=99)
    (tmp_path / "bad1.json").write_text(json.dumps(bad))
    with pytest.raises(ValueError, match="format"):
        load_forest(tmp_path / "bad1.json")

    bad = json.loads(path.read_text())
    bad["trees"] = bad["trees"][:1]
    (tmp_path / "bad2.json").write_text(json.dumps(bad))
    with pytest.raises(ValueError, match="trees"):
        load_forest(tmp_path / "bad2.json")

    bad = json.loads(path.read_text())

    def poison(node):
        if "channel" in node:
            node["channel"] = 77
        else:
            return
    poison(bad["trees"][0])
    (tmp_path / "bad3.json").write_text(json.dumps(bad))
    if "channel" in bad["trees"][0]:
        with pytest.raises(ValueError, match="channel"):
            load_forest(tmp_path / "bad3.json")


def test_leaf_validation():
    with pytest.raises(ValueError):
        Leaf(np.array([0, 0, 0]))
    with pytest.raises(ValueError):
        Leaf(np.array([-1, 2, 0]))


def test_tree_node_round_trip():
    node = Split(
        channel=2,
        threshold=1.5,
        left=Leaf(np.array([3, 0, 0])),
        right=Split(channel=0, threshold=-1.0, left=Leaf(np.array([0, 2, 0])), right=Leaf(np.array([0, 0, 4]))),
    )
    tree = DecisionTree.from_node(node, n_labels=3)
    assert tree.n_nodes == 5
    assert tree.n_leaves == 3
    back = tree.as_node()
    assert isinstance(back, Split) and back.channel == 2
    assert back.left.class_counts.tolist() == [3, 0, 0]
