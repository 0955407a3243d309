"""Soft-margin RBF support vector machine solved by sequential minimal optimization.

The dual ``min 1/2 a'Qa - e'a`` subject to ``0 <= a <= C`` and ``y'a = 0`` is
solved two coordinates at a time. The working pair is the maximal violating
pair with second-order selection of the second index; the solver stops once
the KKT violation ``m(a) - M(a)`` drops below ``tol``.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConvergenceFailure, ValidationError
from .base import FLAT, Algorithm, ModelSpec, TrainedModel, check_binary, get_algorithm, register
from .losses import sigmoid

TAU = 1e-12


def rbf_kernel(A, B, gamma):
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def default_gamma(X):
    """``1 / (D * var(X))``, falling back to ``1 / D`` for constant inputs."""
    var = X.var()
    return 1.0 / (X.shape[1] * (var if var > 0 else 1.0))


def smo(K, y, C, tol=1e-3, max_iter=None):
    """Solve the dual for kernel matrix ``K`` and labels ``y`` in {-1, +1}.

    Returns ``(alpha, rho, n_iter, converged)``; the decision function is
    ``sum_t alpha_t y_t K(x_t, x) - rho``.
    """
    m = y.size
    if max_iter is None:
        max_iter = max(100_000, 100 * m)
    alpha = np.zeros(m)
    G = -np.ones(m)
    diag = np.diag(K).copy()
    converged = False
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        g_max = yG[i]
        g_min = np.min(np.where(low, yG, np.inf))
        if g_max - g_min < tol:
            converged = True
            break
        b = g_max - yG
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))
        it += 1

        ai_old, aj_old = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            else:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, total
                if alpha[i] < 0:
                    alpha[i], alpha[j] = 0.0, total
        d_i, d_j = alpha[i] - ai_old, alpha[j] - aj_old
        G += y * (y[i] * d_i * K[:, i] + y[j] * d_j * K[:, j])

    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    return alpha, rho, it, converged


def _train(X, y01, seed, class_weights=None, C=1.0, gamma=None, tol=1e-3, max_iter=None):
    # seed unused: working-set selection is deterministic
    if not C > 0:
        raise ValidationError("C must be positive")
    gamma = default_gamma(X) if gamma is None else float(gamma)
    if not gamma > 0:
        raise ValidationError("gamma must be positive")
    y = np.where(y01 == 1, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    alpha, rho, n_iter, converged = smo(K, y, float(C), tol, max_iter)
    sv = alpha > 0
    params = {"support_vectors": X[sv], "dual_coef": (alpha * y)[sv], "rho": np.array(rho),
              "gamma": np.array(gamma), "alpha": alpha, "y": y}
    info = {"iterations": n_iter, "converged": bool(converged), "n_support": int(sv.sum())}
    if not converged:
        raise ConvergenceFailure(f"SMO did not reach tol={tol} in {n_iter} iterations", (params, info))
    return params, info


def decision_function(params, X):
    K = rbf_kernel(X, params["support_vectors"], float(params["gamma"]))
    return K @ params["dual_coef"] - float(params["rho"])


def _predict(params, X, **_):
    p = sigmoid(decision_function(params, X))
    return p, (p >= 0.5).astype(np.int64)


register(Algorithm("svm_rbf", _train, _predict, FLAT,
                   defaults={"C": 1.0, "gamma": None, "tol": 1e-3, "max_iter": None}))


def train_svm(features, labels, C, gamma=None, seed=0, tol=1e-3, max_iter=None):
    """Fit an RBF SVM on caller-standardized ``features``.

    Raises :class:`ConvergenceFailure` (carrying the partial model) when the
    iteration budget runs out first.
    """
    y = check_binary(labels)
    X = np.asarray(features, dtype=float)
    shape = X.shape[1:]
    X = X.reshape(X.shape[0], -1)
    spec = ModelSpec("svm_rbf", {"C": C, "gamma": gamma, "tol": tol, "max_iter": max_iter}, seed)
    algo = get_algorithm("svm_rbf")
    try:
        params, info = algo.train(X, y, seed, **spec.resolved())
    except ConvergenceFailure as exc:
        params, info = exc.model
        exc.model = TrainedModel(spec, params, FLAT, tuple(shape), info=info)
        raise
    return TrainedModel(spec, params, FLAT, tuple(shape), info=info)
