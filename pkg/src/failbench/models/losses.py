"""Binary cross-entropy and the sigmoid-F1 surrogate, with gradients w.r.t. logits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class LossConfig:
    kind: str = "bce"
    beta: float = 1.0
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("bce", "sigmoid_f1"):
            raise ValidationError(f"unknown loss {self.kind!r}")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")


def sigmoid(u):
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def bce_loss(logits, labels, weights=None):
    """Mean (optionally class-weighted) binary cross-entropy on raw logits."""
    return bce_loss_and_grad(logits, labels, weights)[0]


def bce_loss_and_grad(logits, labels, weights=None):
    u = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=float)
    w = np.ones_like(u) if weights is None else weights.for_labels(y).astype(float)
    # -y log s(u) - (1-y) log(1-s(u)) == softplus(u) - y*u
    per = np.logaddexp(0.0, u) - y * u
    loss = float(np.mean(w * per))
    grad = w * (sigmoid(u) - y) / u.size
    return loss, grad


def sigmoid_f1_loss(logits, labels, beta=1.0, eta=0.0):
    """``1 - 2tp / (2tp + fp + fn)`` on sigmoid-smoothed confusion counts."""
    return sigmoid_f1_loss_and_grad(logits, labels, beta, eta)[0]


def sigmoid_f1_loss_and_grad(logits, labels, beta=1.0, eta=0.0):
    u = np.asarray(logits, dtype=float)
    y = np.asarray(labels, dtype=float)
    s = sigmoid(beta * (u + eta))
    tp = np.sum(s * y)
    # 2tp + fp + fn collapses to sum(s) + sum(y)
    denom = np.sum(s) + np.sum(y)
    if not denom > 0:
        return 1.0, np.zeros_like(u)
    loss = 1.0 - 2.0 * tp / denom
    dl_ds = -(2.0 * y * denom - 2.0 * tp) / denom ** 2
    return float(loss), dl_ds * beta * s * (1.0 - s)


def loss_and_grad(cfg, logits, labels, weights=None):
    if cfg.kind == "bce":
        return bce_loss_and_grad(logits, labels, weights)
    return sigmoid_f1_loss_and_grad(logits, labels, cfg.beta, cfg.eta)
