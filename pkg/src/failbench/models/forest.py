"""Random forest of Gini CART trees, grown to purity."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ValidationError
from .base import FLAT, Algorithm, ModelSpec, check_binary, register, train_raw

LEAF = -1


def _best_split(vals, ys, feats):
    """Lowest weighted-Gini split given per-feature sorted ``vals`` and ``ys``.

    Columns of ``vals``/``ys`` follow ``feats``. Returns ``(feature, threshold)``
    or ``None`` when every listed feature is constant.
    """
    n = ys.shape[0]
    pos_left = np.cumsum(ys, axis=0)[:-1]
    n_left = np.arange(1, n)[:, None]
    n_right = n - n_left
    p_left = pos_left / n_left
    p_right = (ys.sum(axis=0) - pos_left) / n_right
    impurity = (n_left * 2 * p_left * (1 - p_left) + n_right * 2 * p_right * (1 - p_right)) / n
    valid = vals[:-1] < vals[1:]
    if not valid.any():
        return None
    impurity = np.where(valid, impurity, np.inf)
    # row-major argmin over (feature, position): earliest feature in draw order wins ties
    flat = np.argmin(impurity.T)
    j, i = divmod(int(flat), n - 1)
    lo, hi = vals[i, j], vals[i + 1, j]
    thr = lo + (hi - lo) / 2
    if not lo <= thr < hi:
        thr = lo
    return feats[j], float(thr)


def build_tree(X, y, rng, n_features):
    """Grow one unpruned CART tree; returns parallel node arrays.

    Every feature is sorted once at the root; children inherit the order by
    filtering, which keeps the stable tie order of a fresh sort.
    """
    m, d = X.shape
    feature, threshold, left, right, label = [], [], [], [], []

    def new_node():
        for arr, v in ((feature, LEAF), (threshold, 0.0), (left, LEAF), (right, LEAF), (label, 0)):
            arr.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.argsort(X, axis=0, kind="stable"))]
    while stack:
        node, order = stack.pop()
        n = order.shape[0]
        pos = int(y[order[:, 0]].sum())
        # majority label, ties to no-failure
        label[node] = 1 if 2 * pos > n else 0
        if n < 2 or pos == 0 or pos == n:
            continue
        perm = rng.permutation(d)

        def attempt(feats):
            o = order[:, feats]
            return _best_split(X[o, feats], y[o], feats)

        split = attempt(perm[:n_features])
        if split is None and n_features < d:
            split = attempt(perm[n_features:])
        if split is None:
            continue
        f, thr = split
        go_left = X[:, f] <= thr
        feature[node], threshold[node] = int(f), thr
        l, r = new_node(), new_node()
        left[node], right[node] = l, r
        keep = go_left[order]
        n_l = int(keep[:, 0].sum())
        stack.append((r, order.T[~keep.T].reshape(d, n - n_l).T))
        stack.append((l, order.T[keep.T].reshape(d, n_l).T))
    return (np.array(feature, dtype=np.int64), np.array(threshold, dtype=float),
            np.array(left, dtype=np.int64), np.array(right, dtype=np.int64), np.array(label, dtype=np.int64))


def _apply(params, X):
    """Leaf label reached by every sample in every tree: ``(n_trees, n_samples)``."""
    feature, threshold = params["feature"], params["threshold"]
    left, right, leaf_label = params["left"], params["right"], params["label"]
    roots = params["roots"]
    n = X.shape[0]
    rows = np.arange(n)
    out = np.empty((roots.size, n), dtype=np.int64)
    for t, root in enumerate(roots):
        node = np.full(n, root)
        while True:
            f = feature[node]
            internal = f >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, f, 0)] <= threshold[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)
        out[t] = leaf_label[node]
    return out


def _train(X, y, seed, class_weights=None, n_estimators=100, max_features_fraction=1.0, bootstrap=True):
    # class weights are not used: the protocols train forests on undersampled data
    n_estimators = int(n_estimators)
    if n_estimators < 1:
        raise ValidationError("n_estimators must be >= 1")
    if not 0 < max_features_fraction <= 1:
        raise ValidationError("max_features_fraction must lie in (0, 1]")
    m, d = X.shape
    k = min(d, max(1, math.ceil(max_features_fraction * d)))
    parts = {key: [] for key in ("feature", "threshold", "left", "right", "label")}
    roots = []
    offset = 0
    for child in np.random.SeedSequence(seed).spawn(n_estimators):
        rng = np.random.default_rng(child)
        idx = rng.integers(0, m, m) if bootstrap else np.arange(m)
        f, thr, lft, rgt, lab = build_tree(X[idx], y[idx], rng, k)
        roots.append(offset)
        parts["feature"].append(f)
        parts["threshold"].append(thr)
        parts["left"].append(np.where(lft >= 0, lft + offset, LEAF))
        parts["right"].append(np.where(rgt >= 0, rgt + offset, LEAF))
        parts["label"].append(lab)
        offset += f.size
    params = {key: np.concatenate(v) for key, v in parts.items()}
    params["roots"] = np.array(roots, dtype=np.int64)
    return params, {"n_nodes": int(offset)}


def _predict(params, X, **_):
    votes = _apply(params, X)
    n_trees = votes.shape[0]
    frac = votes.mean(axis=0)
    # strict majority: a tied vote is no-failure
    return frac, (2 * votes.sum(axis=0) > n_trees).astype(np.int64)


register(Algorithm("random_forest", _train, _predict, FLAT,
                   defaults={"n_estimators": 100, "max_features_fraction": 1.0, "bootstrap": True},
                   needs_both_classes=False))


def train_rf(features, labels, n_estimators, max_features_fraction, seed=0, bootstrap=True):
    """Fit a random forest on ``features`` used as given."""
    check_binary(labels, both=False)
    spec = ModelSpec("random_forest", {"n_estimators": n_estimators,
                                       "max_features_fraction": max_features_fraction,
                                       "bootstrap": bootstrap}, seed)
    return train_raw(spec, features, labels)
