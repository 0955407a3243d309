"""Confusion counts and the precision / recall / F1 family, failure as positive."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMatrix, LengthMismatch


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: float
    fp: float
    fn: float
    tn: float

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def swapped(self):
        """The same matrix with no-failure taken as the positive class."""
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp)


@dataclass(frozen=True)
class MetricsReport:
    precision_f: float
    recall_f: float
    f1_f: float
    precision_n: float
    recall_n: float
    f1_n: float
    macro_f1: float

    @property
    def macro_precision(self):
        return (self.precision_f + self.precision_n) / 2

    @property
    def macro_recall(self):
        return (self.recall_f + self.recall_n) / 2


def confusion(y_true, y_pred, weights=None):
    """Confusion counts; with ``weights`` each sample counts its true-class weight."""
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    if y_true.shape != y_pred.shape:
        raise LengthMismatch(f"{y_true.size} labels vs {y_pred.size} predictions")
    if y_true.size == 0:
        raise EmptyMatrix("no samples")
    if weights is None:
        w = np.ones(y_true.size, dtype=np.int64)
    else:
        w = np.where(y_true, weights.w_failure, weights.w_no_failure)
    return ConfusionMatrix(
        tp=w[y_true & y_pred].sum().item(),
        fp=w[~y_true & y_pred].sum().item(),
        fn=w[y_true & ~y_pred].sum().item(),
        tn=w[~y_true & ~y_pred].sum().item(),
    )


def _ratio(a, b):
    return a / b if b > 0 else 0.0


def _prf(tp, fp, fn):
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    return p, r, _ratio(2 * p * r, p + r)


def report(cm):
    """Per-class precision, recall and F1 plus the macro F1.

    Any 0/0 term is taken as 0.
    """
    if not cm.total > 0:
        raise EmptyMatrix("confusion matrix is empty")
    pf, rf, ff = _prf(cm.tp, cm.fp, cm.fn)
    pn, rn, fn_ = _prf(cm.tn, cm.fn, cm.fp)
    return MetricsReport(pf, rf, ff, pn, rn, fn_, (ff + fn_) / 2)


def macro_f1(y_true, y_pred, weights=None):
    return report(confusion(y_true, y_pred, weights)).macro_f1
