"""From-scratch CART decision trees and the random-forest learner.

Trees grow greedily on Gini impurity with axis-aligned midpoint splits,
evaluating every boundary between consecutive distinct values of each
candidate channel.  Tie-breaks are pinned: lower channel index first,
then lower threshold.  Each tree trains on its own bootstrap sample with
an RNG stream derived from (seed, tree index), so growing more trees
never perturbs earlier ones and parallel training is bit-identical to
serial.

Two growth paths exist: the compiled kernel in `_kernels` (used by
`train`) and `grow_tree_reference` here, a plain-Python mirror kept for
the equivalence tests.  Both execute the same arithmetic in the same
order; selection comparisons are exact, so keep them in lockstep.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .core import EmotionLabel, LABELS, N_CHANNELS, ChannelId, Dataset, SampleRecord
from .rng import Rng, derive_seed

MODEL_FORMAT_VERSION = 1
_NO_DEPTH_LIMIT = 2**31


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 25
    features_per_split: int = 3  # floor(sqrt(14))
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1
    seed: int = 0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if not 1 <= self.features_per_split <= N_CHANNELS:
            raise ValueError(f"features_per_split must be in [1, {N_CHANNELS}]")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class Leaf:
    class_counts: np.ndarray  # per-label counts, canonical label order

    def __post_init__(self):
        counts = np.asarray(self.class_counts, dtype=np.int64)
        if (counts < 0).any() or counts.sum() == 0:
            raise ValueError("leaf counts must be nonnegative and not all zero")
        object.__setattr__(self, "class_counts", counts)


@dataclass(frozen=True)
class Split:
    channel: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class SplitChoice:
    channel: int
    threshold: float
    impurity_decrease: float


@dataclass(frozen=True)
class Prediction:
    label: EmotionLabel
    vote_fractions: dict[EmotionLabel, float]


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p_i^2)."""
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini of empty counts")
    p = counts / total
    return float(1.0 - (p * p).sum())


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_channels: Sequence[int],
    min_samples_leaf: int = 1,
    n_labels: Optional[int] = None,
) -> Optional[SplitChoice]:
    """Exhaustive midpoint search over the candidate channels.

    Minimizes the weighted child impurity (equivalently maximizes Gini
    decrease); returns None when the samples are pure or no candidate
    channel has two distinct values with admissible child sizes.
    """
    y = np.asarray(y, dtype=np.int64)
    m = y.size
    if m == 0:
        raise ValueError("best_split of no samples")
    if n_labels is None:
        n_labels = int(y.max()) + 1
    total = np.bincount(y, minlength=n_labels).astype(np.int64)
    if (total == m).any():
        return None
    found = _best_split_score(X, y, total, sorted(set(int(c) for c in candidate_channels)), min_samples_leaf)
    if found is None:
        return None
    score, channel, threshold = found
    decrease = gini(total) - score / m
    return SplitChoice(channel=channel, threshold=threshold, impurity_decrease=decrease)


def _best_split_score(X, y, total, channels, min_samples_leaf):
    """(score, channel, threshold) minimizing sum of child sizes times Gini.

    The score arithmetic matches the compiled kernel term for term so both
    implementations select identical splits, including on exact ties.
    """
    m = y.size
    n_labels = total.size
    best = None
    for c in channels:
        vals = X[:, c]
        order = np.argsort(vals, kind="mergesort")
        sv = vals[order]
        sy = y[order]
        onehot = np.zeros((m, n_labels), dtype=np.int64)
        onehot[np.arange(m), sy] = 1
        left_counts = np.cumsum(onehot, axis=0)[:-1].astype(np.float64)
        right_counts = total.astype(np.float64) - left_counts
        nl = np.arange(1, m, dtype=np.float64)
        nr = m - nl
        sl = (left_counts * left_counts).sum(axis=1)
        sr = (right_counts * right_counts).sum(axis=1)
        score = (nl - sl / nl) + (nr - sr / nr)
        valid = (sv[1:] > sv[:-1]) & (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
        if not valid.any():
            continue
        idx = np.flatnonzero(valid)
        k = idx[np.argmin(score[idx])]
        if best is None or score[k] < best[0]:
            best = (float(score[k]), c, float((sv[k] + sv[k + 1]) * 0.5))
    return best


class DecisionTree:
    """One grown tree in flat-array form (feature -1 marks a leaf)."""

    def __init__(self, feature, threshold, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def leaf_labels(self) -> np.ndarray:
        """Majority label per node; ties resolve to the canonical order."""
        return np.argmax(self.counts, axis=1).astype(np.int64)

    def predict_leaf(self, values: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            if values[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return node

    def as_node(self, node: int = 0) -> TreeNode:
        if self.feature[node] < 0:
            return Leaf(self.counts[node].copy())
        return Split(
            channel=int(self.feature[node]),
            threshold=float(self.threshold[node]),
            left=self.as_node(int(self.left[node])),
            right=self.as_node(int(self.right[node])),
        )

    @classmethod
    def from_node(cls, root: TreeNode, n_labels: int) -> "DecisionTree":
        feature, threshold, left, right, counts = [], [], [], [], []

        def alloc():
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append(np.zeros(n_labels, dtype=np.int64))
            return len(feature) - 1

        def fill(node: TreeNode, nid: int):
            if isinstance(node, Leaf):
                counts[nid] = node.class_counts
                return
            feature[nid] = node.channel
            threshold[nid] = node.threshold
            lid = alloc()
            rid = alloc()
            left[nid] = lid
            right[nid] = rid
            fill(node.left, lid)
            fill(node.right, rid)
            counts[nid] = counts[lid] + counts[rid]

        rid = alloc()
        fill(root, rid)
        return cls(feature, threshold, left, right, np.vstack(counts))

    def equals(self, other: "DecisionTree") -> bool:
        return (
            np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.counts, other.counts)
        )


def grow_tree(X: np.ndarray, y: np.ndarray, cfg: TrainConfig, rng: Rng, n_labels: int = 3) -> DecisionTree:
    """Grow one tree on the given samples (no bootstrap), consuming `rng`."""
    if y.size == 0:
        raise ValueError("cannot grow a tree on no samples")
    depth = _NO_DEPTH_LIMIT if cfg.max_depth is None else cfg.max_depth
    state = rng.state_array()
    arrays = _kernels.grow_tree(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.int64),
        n_labels,
        cfg.features_per_split,
        depth,
        cfg.min_samples_leaf,
        state,
    )
    rng.set_state_array(state)
    return DecisionTree(*arrays)


def grow_tree_reference(
    X: np.ndarray, y: np.ndarray, cfg: TrainConfig, rng: Rng, n_labels: int = 3
) -> DecisionTree:
    """Pure-Python twin of `grow_tree`; must stay in lockstep with the kernel."""
    if y.size == 0:
        raise ValueError("cannot grow a tree on no samples")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    max_depth = _NO_DEPTH_LIMIT if cfg.max_depth is None else cfg.max_depth
    k = cfg.features_per_split
    min_leaf = cfg.min_samples_leaf
    d = X.shape[1]

    feature, threshold, left, right, counts = [], [], [], [], []

    def alloc():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(None)
        return len(feature) - 1

    def draw_channels():
        pool = list(range(d))
        for i in range(k):
            j = i + rng.randbelow(d - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:k])

    def build(nid: int, indices: np.ndarray, depth: int):
        ys = y[indices]
        cc = np.bincount(ys, minlength=n_labels).astype(np.int64)
        counts[nid] = cc
        m = indices.size
        if (cc == m).any() or depth >= max_depth or m < 2 * min_leaf or m < 2:
            return
        chans = draw_channels()
        found = _best_split_score(X[indices], ys, cc, chans, min_leaf)
        if found is None:
            return
        _, c, t = found
        go_left = X[indices, c] <= t
        left_idx = indices[go_left]
        right_idx = indices[~go_left]
        feature[nid] = c
        threshold[nid] = t
        lid = alloc()
        rid = alloc()
        left[nid] = lid
        right[nid] = rid
        build(lid, left_idx, depth + 1)
        build(rid, right_idx, depth + 1)

    root = alloc()
    build(root, np.arange(y.size, dtype=np.int64), 0)
    return DecisionTree(feature, threshold, left, right, np.vstack(counts))


class Forest:
    """Trained ensemble: trees, training config, and the label set."""

    def __init__(self, trees: list[DecisionTree], config: TrainConfig, labels: list[EmotionLabel]):
        if len(trees) != config.n_trees:
            raise ValueError("tree count disagrees with config")
        self.trees = trees
        self.config = config
        self.labels = list(labels)
        self._pack = None

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def _packed(self):
        if self._pack is None:
            roots = np.zeros(len(self.trees), dtype=np.int64)
            off = 0
            feats, thrs, lefts, rights, leafl = [], [], [], [], []
            for t, tree in enumerate(self.trees):
                roots[t] = off
                child_off = np.where(tree.left >= 0, tree.left + off, -1)
                feats.append(tree.feature)
                thrs.append(tree.threshold)
                lefts.append(child_off)
                rights.append(np.where(tree.right >= 0, tree.right + off, -1))
                leafl.append(tree.leaf_labels())
                off += tree.n_nodes
            self._pack = (
                np.concatenate(feats),
                np.concatenate(thrs),
                np.concatenate(lefts),
                np.concatenate(rights),
                np.concatenate(leafl),
                roots,
            )
        return self._pack

    def votes(self, X: np.ndarray) -> np.ndarray:
        """Per-sample per-label vote counts over all trees."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        feat, thr, left, right, leafl, roots = self._packed()
        return _kernels.forest_votes(feat, thr, left, right, leafl, roots, X, self.n_labels)

    def vote_fractions(self, X: np.ndarray) -> np.ndarray:
        return self.votes(X) / float(len(self.trees))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Predicted label index per sample (argmax, canonical tie-break)."""
        return np.argmax(self.votes(X), axis=1)

    def predict(self, record: Union[SampleRecord, np.ndarray]) -> Prediction:
        values = record.values if isinstance(record, SampleRecord) else np.asarray(record)
        fractions = self.vote_fractions(values.reshape(1, -1))[0]
        idx = int(np.argmax(fractions))
        return Prediction(
            label=self.labels[idx],
            vote_fractions={lab: float(fractions[i]) for i, lab in enumerate(self.labels)},
        )

    def label_index(self, label: EmotionLabel) -> int:
        return self.labels.index(label)


def _training_arrays(ds: Dataset) -> tuple[np.ndarray, np.ndarray, list[EmotionLabel]]:
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    if not ds.is_labeled():
        raise ValueError("training requires a fully labeled dataset")
    labels = sorted(ds.class_counts().keys())
    label_pos = {int(lab): i for i, lab in enumerate(labels)}
    y = np.array([label_pos[int(c)] for c in ds.label_codes], dtype=np.int64)
    return ds.values, y, labels


def grow_forest_tree(X: np.ndarray, y: np.ndarray, n_labels: int, cfg: TrainConfig, tree_index: int) -> DecisionTree:
    """Tree `tree_index` of the forest (cfg.seed, cfg) would train.

    The per-tree stream depends only on (cfg.seed, tree_index), so an
    ensemble built tree by tree is an exact prefix of any larger forest
    with the same config.
    """
    state = _kernels.xo_init(np.uint64(derive_seed(cfg.seed, tree_index)))
    depth = _NO_DEPTH_LIMIT if cfg.max_depth is None else cfg.max_depth
    if cfg.bootstrap:
        bidx = _kernels.bootstrap_indices(state, y.size)
        Xb = np.ascontiguousarray(X[bidx])
        yb = y[bidx]
    else:
        Xb, yb = np.ascontiguousarray(X), y
    arrays = _kernels.grow_tree(Xb, yb, n_labels, cfg.features_per_split, depth, cfg.min_samples_leaf, state)
    return DecisionTree(*arrays)


def train(ds: Dataset, cfg: TrainConfig = TrainConfig(), n_jobs: int = 1) -> Forest:
    """Train a forest; deterministic given (dataset order, config).

    Each tree t draws its bootstrap and its per-node channel subsets from
    an independent stream seeded by (cfg.seed, t), which makes serial and
    parallel training bit-identical.
    """
    X, y, labels = _training_arrays(ds)
    if n_jobs == 1:
        trees = [grow_forest_tree(X, y, len(labels), cfg, t) for t in range(cfg.n_trees)]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            trees = list(ex.map(lambda t: grow_forest_tree(X, y, len(labels), cfg, t), range(cfg.n_trees)))
    return Forest(trees, cfg, labels)


def _node_to_json(tree: DecisionTree, node: int) -> dict:
    if tree.feature[node] < 0:
        return {"counts": [int(c) for c in tree.counts[node]]}
    return {
        "channel": int(tree.feature[node]),
        "threshold": float(tree.threshold[node]),
        "left": _node_to_json(tree, int(tree.left[node])),
        "right": _node_to_json(tree, int(tree.right[node])),
    }


def _node_from_json(obj: dict, n_labels: int) -> TreeNode:
    if "counts" in obj:
        counts = obj["counts"]
        if len(counts) != n_labels:
            raise ValueError(f"leaf counts length {len(counts)} != {n_labels} labels")
        return Leaf(np.asarray(counts, dtype=np.int64))
    channel = int(obj["channel"])
    if not 0 <= channel < N_CHANNELS:
        raise ValueError(f"channel index {channel} out of range")
    return Split(
        channel=channel,
        threshold=float(obj["threshold"]),
        left=_node_from_json(obj["left"], n_labels),
        right=_node_from_json(obj["right"], n_labels),
    )


def save_forest(forest: Forest, path) -> None:
    cfg = forest.config
    doc = {
        "format": MODEL_FORMAT_VERSION,
        "config": {
            "n_trees": cfg.n_trees,
            "features_per_split": cfg.features_per_split,
            "max_depth": cfg.max_depth,
            "min_samples_leaf": cfg.min_samples_leaf,
            "seed": cfg.seed,
            "bootstrap": cfg.bootstrap,
        },
        "labels": [lab.name for lab in forest.labels],
        "trees": [_node_to_json(t, 0) for t in forest.trees],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_forest(path) -> Forest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    c = doc["config"]
    cfg = TrainConfig(
        n_trees=c["n_trees"],
        features_per_split=c["features_per_split"],
        max_depth=c["max_depth"],
        min_samples_leaf=c["min_samples_leaf"],
        seed=c["seed"],
        bootstrap=c.get("bootstrap", True),
    )
    labels = [EmotionLabel[name] for name in doc["labels"]]
    if len(doc["trees"]) != cfg.n_trees:
        raise ValueError(f"model holds {len(doc['trees'])} trees, config says {cfg.n_trees}")
    trees = [DecisionTree.from_node(_node_from_json(t, len(labels)), len(labels)) for t in doc["trees"]]
    return Forest(trees, cfg, labels)
