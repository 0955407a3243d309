"""Random undersampling, train/test overlap exclusion and class weights."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import NoMinoritySamples
from .windows import FAILURE


@dataclass(frozen=True, eq=False)
class RusInstance:
    kept_indices: np.ndarray
    seed: int

    def select(self, items):
        return [items[i] for i in self.kept_indices]


@dataclass(frozen=True)
class ClassWeights:
    w_failure: float
    w_no_failure: float

    def for_labels(self, y):
        y = np.asarray(y)
        return np.where(y == FAILURE, self.w_failure, self.w_no_failure)


def _labels(windows_or_labels):
    items = list(windows_or_labels)
    if items and hasattr(items[0], "label"):
        return np.array([w.label for w in items], dtype=np.int64)
    return np.asarray(items, dtype=np.int64)


def random_undersample(windows, seed):
    """Keep every minority window and an equal-size random subset of the majority.

    Accepts either labeled windows or a plain label sequence. The returned
    indices are sorted, so the instance preserves time order.
    """
    y = _labels(windows)
    pos = np.flatnonzero(y == FAILURE)
    neg = np.flatnonzero(y != FAILURE)
    if pos.size == 0 or neg.size == 0:
        raise NoMinoritySamples("both classes are needed for undersampling")
    minority, majority = (pos, neg) if pos.size <= neg.size else (neg, pos)
    rng = np.random.default_rng(seed)
    drawn = rng.choice(majority, size=minority.size, replace=False)
    return RusInstance(np.sort(np.concatenate((minority, drawn))), seed)


def exclude_overlap(train, test):
    """Drop train windows whose RW+PW rows share any row with a test window of the same session."""
    covered = defaultdict(list)
    for w in test:
        covered[w.session_id].append((w.start_row, w.end_row))
    if not covered:
        return list(train)
    merged = {}
    for sid, spans in covered.items():
        spans.sort()
        lo = np.array([s for s, _ in spans])
        hi = np.maximum.accumulate(np.array([e for _, e in spans]))
        merged[sid] = (lo, hi)
    kept = []
    for w in train:
        if w.session_id not in merged:
            kept.append(w)
            continue
        lo, hi = merged[w.session_id]
        # last test span starting at or before this window's end
        k = np.searchsorted(lo, w.end_row, side="right") - 1
        if k < 0 or hi[k] < w.start_row:
            kept.append(w)
    return kept


def class_weights(windows):
    """Balanced weights ``total / (2 * count_c)``."""
    y = _labels(windows)
    n_pos = int(np.sum(y == FAILURE))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise NoMinoritySamples("both classes are needed for class weights")
    return ClassWeights(y.size / (2 * n_pos), y.size / (2 * n_neg))
