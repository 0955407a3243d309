"""L2-regularized logistic regression trained by damped Newton iterations."""
from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .base import FLAT, Algorithm, ModelSpec, check_binary, register, train_raw
from .losses import bce_loss_and_grad, loss_and_grad, sigmoid

MAX_ITER = 200
GRAD_TOL = 1e-6


def objective(w, b, X, y, C, weights=None):
    """Mean BCE plus ``||w||^2 / (2 C M)``; returns ``(value, grad_w, grad_b)``."""
    m = X.shape[0]
    loss, g_logit = bce_loss_and_grad(X @ w + b, y, weights)
    value = loss + (w @ w) / (2.0 * C * m)
    return value, X.T @ g_logit + w / (C * m), float(g_logit.sum())


def loss_grad(w, b, X, y, loss_cfg, weights=None):
    """Unregularized loss of the linear logits ``X w + b`` and its gradient."""
    loss, g = loss_and_grad(loss_cfg, X @ w + b, y, weights)
    return loss, X.T @ g, float(g.sum())


def _hessian(w, b, X, y, C, weights):
    m = X.shape[0]
    p = sigmoid(X @ w + b)
    h = p * (1.0 - p) / m
    if weights is not None:
        h = h * weights.for_labels(y)
    Xb = np.hstack((X, np.ones((m, 1))))
    H = (Xb * h[:, None]).T @ Xb
    H[np.arange(X.shape[1]), np.arange(X.shape[1])] += 1.0 / (C * m)
    return H


def _train(X, y, seed, class_weights=None, C=1.0, max_iter=MAX_ITER, tol=GRAD_TOL):
    # damped Newton with Armijo backtracking; the objective is strictly convex in w
    if not C > 0:
        raise ValidationError("C must be positive")
    weights = class_weights
    rng = np.random.default_rng(seed)
    w = rng.normal(scale=0.01, size=X.shape[1])
    b = 0.0
    f, gw, gb = objective(w, b, X, y, C, weights)
    it = 0
    for it in range(1, int(max_iter) + 1):
        g = np.append(gw, gb)
        if np.linalg.norm(g) <= tol:
            break
        H = _hessian(w, b, X, y, C, weights)
        H[np.diag_indices_from(H)] += 1e-12
        try:
            d = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            d = -g
        slope = g @ d
        if not slope < 0:
            d, slope = -g, -(g @ g)
        step = 1.0
        while True:
            w_new, b_new = w + step * d[:-1], b + step * d[-1]
            f_new, gw_new, gb_new = objective(w_new, b_new, X, y, C, weights)
            if f_new <= f + 1e-4 * step * slope or step < 1e-12:
                break
            step *= 0.5
        if step < 1e-12 and f_new >= f:
            break
        w, b, f, gw, gb = w_new, b_new, f_new, gw_new, gb_new
    return {"w": w, "b": np.array(b)}, {"iterations": it, "objective": float(f),
                                         "grad_norm": float(np.sqrt(gw @ gw + gb * gb))}


def _predict(params, X, **_):
    p = sigmoid(X @ params["w"] + float(params["b"]))
    return p, (p >= 0.5).astype(np.int64)


register(Algorithm("logreg", _train, _predict, FLAT, defaults={"C": 1.0}))


def train_logreg(features, labels, C, seed=0, class_weights=None):
    """Fit logistic regression on caller-standardized ``features``."""
    check_binary(labels)
    return train_raw(ModelSpec("logreg", {"C": C}, seed), features, labels, class_weights)
