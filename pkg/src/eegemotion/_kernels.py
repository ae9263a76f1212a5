"""numba-compiled hot paths: permutations, bootstraps, tree growth, voting.

Each kernel continues the exact xoshiro256** stream of `rng.Rng`; the test
suite asserts word-for-word stream equality and tree-for-tree equivalence
against the pure-Python reference implementations.  Keep the arithmetic
here in lockstep with those references: selection among candidate splits
uses exact float comparisons, so both sides must execute the same
operations in the same order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_M64 = U64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = U64(0x9E3779B97F4A7C15)


@njit(cache=True)
def xo_init(seed):
    """xoshiro256** state from a splitmix64 chain, matching Rng(seed)."""
    s = np.empty(4, dtype=np.uint64)
    x = U64(seed) & _M64
    for i in range(4):
        x = (x + _GOLDEN) & _M64
        z = x
        z = ((z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)) & _M64
        z = ((z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)) & _M64
        s[i] = z ^ (z >> U64(31))
    return s


@njit(cache=True, inline="always")
def _rotl(x, k):
    return ((x << U64(k)) | (x >> U64(64 - k))) & _M64


@njit(cache=True)
def xo_next(s):
    result = (_rotl((s[1] * U64(5)) & _M64, 7) * U64(9)) & _M64
    t = (s[1] << U64(17)) & _M64
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def xo_fill(state, n):
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        out[i] = xo_next(state)
    return out


@njit(cache=True)
def permutation(state, n):
    """Fisher-Yates permutation, same stream as Rng.shuffle."""
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = np.int64(xo_next(state) % U64(i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


@njit(cache=True)
def bootstrap_indices(state, n):
    """n draws with replacement from range(n), one 64-bit word each."""
    idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        idx[i] = np.int64(xo_next(state) % U64(n))
    return idx


@njit(cache=True)
def draw_channels(state, n_channels, k):
    """k distinct channel indices by partial Fisher-Yates, then sorted.

    Consumes exactly k words.  Sorting fixes the evaluation order so split
    ties resolve to the lowest channel index regardless of draw order.
    """
    pool = np.arange(n_channels, dtype=np.int64)
    for i in range(k):
        j = i + np.int64(xo_next(state) % U64(n_channels - i))
        tmp = pool[i]
        pool[i] = pool[j]
        pool[j] = tmp
    chosen = np.sort(pool[:k])
    return chosen


@njit(cache=True)
def grow_tree(X, y, n_labels, k_feats, max_depth, min_leaf, state):
    """Greedy CART growth over X[idx], flat-array output.

    Returns (feature, threshold, left, right, counts) arrays; feature -1
    marks a leaf.  Children of node i sit at left[i]/right[i].  Node ids
    follow preorder with the left subtree completed before the right, which
    pins the per-node RNG consumption order.
    """
    n, d = X.shape
    max_nodes = 2 * n + 1
    feat = np.full(max_nodes, -1, dtype=np.int64)
    thr = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    counts = np.zeros((max_nodes, n_labels), dtype=np.int64)

    idx = np.arange(n, dtype=np.int64)
    # stack rows: node id, segment lo, segment hi, depth
    stack = np.empty((2 * n + 64, 4), dtype=np.int64)
    n_nodes = 1
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1

    vals = np.empty(n, dtype=np.float64)
    order_labels = np.empty(n, dtype=np.int64)
    tmp = np.empty(n, dtype=np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        lo = stack[top, 1]
        hi = stack[top, 2]
        depth = stack[top, 3]
        m = hi - lo

        cc = np.zeros(n_labels, dtype=np.int64)
        for i in range(lo, hi):
            cc[y[idx[i]]] += 1
        for c in range(n_labels):
            counts[node, c] = cc[c]

        pure = False
        for c in range(n_labels):
            if cc[c] == m:
                pure = True
        if pure or depth >= max_depth or m < 2 * min_leaf or m < 2:
            continue

        chans = draw_channels(state, d, k_feats)

        best_score = np.inf
        best_c = -1
        best_t = 0.0
        for ci in range(k_feats):
            c = chans[ci]
            for i in range(m):
                vals[i] = X[idx[lo + i], c]
            order = np.argsort(vals[:m], kind="mergesort")
            for i in range(m):
                order_labels[i] = y[idx[lo + order[i]]]
            lc = np.zeros(n_labels, dtype=np.int64)
            rc = cc.copy()
            for i in range(m - 1):
                lab = order_labels[i]
                lc[lab] += 1
                rc[lab] -= 1
                v0 = vals[order[i]]
                v1 = vals[order[i + 1]]
                if v1 <= v0:
                    continue
                nl = i + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                sl = 0.0
                sr = 0.0
                for cl in range(n_labels):
                    sl += float(lc[cl]) * float(lc[cl])
                    sr += float(rc[cl]) * float(rc[cl])
                score = (nl - sl / nl) + (nr - sr / nr)
                if score < best_score:
                    best_score = score
                    best_c = c
                    best_t = (v0 + v1) * 0.5
        if best_c < 0:
            continue

        nl = 0
        for i in range(lo, hi):
            if X[idx[i], best_c] <= best_t:
                tmp[nl] = idx[i]
                nl += 1
        nr = nl
        for i in range(lo, hi):
            if X[idx[i], best_c] > best_t:
                tmp[nr] = idx[i]
                nr += 1
        for i in range(m):
            idx[lo + i] = tmp[i]

        feat[node] = best_c
        thr[node] = best_t
        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        left[node] = lid
        right[node] = rid
        stack[top, 0] = rid
        stack[top, 1] = lo + nl
        stack[top, 2] = hi
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lid
        stack[top, 1] = lo
        stack[top, 2] = lo + nl
        stack[top, 3] = depth + 1
        top += 1

    return (
        feat[:n_nodes].copy(),
        thr[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        counts[:n_nodes].copy(),
    )


@njit(cache=True)
def forest_votes(feat, thr, left, right, leaf_label, roots, X, n_labels):
    """Per-sample vote counts over a packed forest.

    The per-tree arrays are concatenated with child ids already rebased;
    `roots` holds each tree's root offset.
    """
    n = X.shape[0]
    votes = np.zeros((n, n_labels), dtype=np.int64)
    for t in range(roots.shape[0]):
        root = roots[t]
        for i in range(n):
            node = root
            while feat[node] >= 0:
                if X[i, feat[node]] <= thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[i, leaf_label[node]] += 1
    return votes
