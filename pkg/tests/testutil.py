"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from eegemotion.core import Dataset, EmotionLabel, N_CHANNELS
from eegemotion.forest import DecisionTree, Forest, Leaf, Split, TrainConfig


def make_dataset(values, labels=None, subject="s01", timestamps=None) -> Dataset:
    """Dataset from an (n, 14) array; labels may be EmotionLabels, ints, or None."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if labels is None:
        codes = np.full(n, -1, dtype=np.int8)
    else:
        codes = np.array([int(l) for l in labels], dtype=np.int8)
    if timestamps is None:
        timestamps = np.arange(n, dtype=np.int64) * 30
    return Dataset(values, codes, np.asarray(timestamps, dtype=np.int64), [subject] * n)


def column_dataset(channel0_values, labels, fill=0.0) -> Dataset:
    """Dataset whose records differ only in channel 0."""
    n = len(channel0_values)
    values = np.full((n, N_CHANNELS), fill, dtype=np.float64)
    values[:, 0] = channel0_values
    return make_dataset(values, labels)


def leaf_only_tree(label_index: int, n_labels: int = 3) -> DecisionTree:
    counts = np.zeros((1, n_labels), dtype=np.int64)
    counts[0, label_index] = 1
    return DecisionTree([-1], [0.0], [-1], [-1], counts)


def stub_forest(votes: dict[EmotionLabel, int], labels=None) -> Forest:
    """Forest of single-leaf trees casting a fixed vote pattern."""
    labels = labels or sorted(votes.keys())
    trees = []
    for lab, n in sorted(votes.items()):
        for _ in range(n):
            trees.append(leaf_only_tree(labels.index(lab), n_labels=len(labels)))
    cfg = TrainConfig(n_trees=len(trees), seed=0)
    return Forest(trees, cfg, labels)


def channel0_classifier() -> Forest:
    """One real tree mapping channel 0: <=1.5 HAPPY, <=2.5 RELAXED, else SAD."""
    node = Split(
        channel=0,
        threshold=1.5,
        left=Leaf(np.array([1, 0, 0])),
        right=Split(
            channel=0,
            threshold=2.5,
            left=Leaf(np.array([0, 1, 0])),
            right=Leaf(np.array([0, 0, 1])),
        ),
    )
    tree = DecisionTree.from_node(node, n_labels=3)
    return Forest([tree], TrainConfig(n_trees=1, seed=0), list(EmotionLabel))
