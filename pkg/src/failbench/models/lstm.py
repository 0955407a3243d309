"""Single-layer (optionally bidirectional) LSTM classifier in plain numpy.

Gates are stacked in the order input, forget, candidate, output. The final
hidden state of each direction feeds one affine head producing a single logit.
Gradients come from hand-written backpropagation through time; training uses
Adam with bias correction and early stopping on a held-out slice.
"""
from __future__ import annotations

import numpy as np

from ..errors import NonFiniteLoss, ValidationError
from .base import SEQUENCE, Algorithm, ModelSpec, check_binary, register, train_raw
from .losses import LossConfig, loss_and_grad, sigmoid

DEFAULTS = {
    "hidden_size": 64,
    "bidirectional": False,
    "loss": "bce",
    "beta": 1.0,
    "eta": 0.0,
    "epochs": 50,
    "batch_size": 32,
    "learning_rate": 1e-3,
    "validation_fraction": 0.1,
    "patience": 5,
}


def init_params(n_inputs, hidden_size, bidirectional, rng):
    bound = 1.0 / np.sqrt(hidden_size)
    dirs = ("f", "b") if bidirectional else ("f",)
    params = {}
    for d in dirs:
        params[f"W_{d}"] = rng.uniform(-bound, bound, (4 * hidden_size, n_inputs))
        params[f"U_{d}"] = rng.uniform(-bound, bound, (4 * hidden_size, hidden_size))
        params[f"b_{d}"] = rng.uniform(-bound, bound, 4 * hidden_size)
    params["w_out"] = rng.uniform(-bound, bound, hidden_size * len(dirs))
    params["b_out"] = rng.uniform(-bound, bound, 1)
    return params


def _run(X, W, U, b):
    """Forward pass of one direction; returns the final hidden state and a tape."""
    B, T, _ = X.shape
    H = U.shape[1]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    tape = []
    for t in range(T):
        z = X[:, t] @ W.T + h @ U.T + b
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        g = np.tanh(z[:, 2 * H:3 * H])
        o = sigmoid(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        tape.append((h, c, i, f, g, o, tc))
        h, c = o * tc, c_new
    return h, tape


def _back(X, U, tape, dh):
    B, T, _ = X.shape
    dW = np.zeros((U.shape[0], X.shape[2]))
    dU = np.zeros_like(U)
    db = np.zeros(U.shape[0])
    dc = np.zeros_like(dh)
    for t in range(T - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, tc = tape[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        dz = np.concatenate((dc * g * i * (1.0 - i),
                             dc * c_prev * f * (1.0 - f),
                             dc * i * (1.0 - g * g),
                             do * o * (1.0 - o)), axis=1)
        dW += dz.T @ X[:, t]
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dh = dz @ U
        dc = dc * f
    return dW, dU, db


def forward(params, X):
    """Logits for a ``(B, T, V)`` batch."""
    return _forward(params, X)[0]


def _forward(params, X):
    h, tape_f = _run(X, params["W_f"], params["U_f"], params["b_f"])
    tapes = {"f": tape_f}
    feats = [h]
    if "W_b" in params:
        hb, tape_b = _run(X[:, ::-1], params["W_b"], params["U_b"], params["b_b"])
        tapes["b"] = tape_b
        feats.append(hb)
    feat = np.concatenate(feats, axis=1)
    return feat @ params["w_out"] + params["b_out"][0], (feat, tapes)


def loss_and_gradients(params, X, y, loss_cfg, weights=None):
    """Loss of the batch and the gradient with respect to every parameter."""
    logits, (feat, tapes) = _forward(params, X)
    loss, dlogit = loss_and_grad(loss_cfg, logits, y, weights)
    grads = {"w_out": feat.T @ dlogit, "b_out": np.array([dlogit.sum()])}
    dfeat = np.outer(dlogit, params["w_out"])
    H = params["U_f"].shape[1]
    dW, dU, db = _back(X, params["U_f"], tapes["f"], dfeat[:, :H])
    grads.update(W_f=dW, U_f=dU, b_f=db)
    if "W_b" in params:
        dW, dU, db = _back(X[:, ::-1], params["U_b"], tapes["b"], dfeat[:, H:])
        grads.update(W_b=dW, U_b=dU, b_b=db)
    return loss, grads


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def _train(X, y, seed, class_weights=None, hidden_size=64, bidirectional=False, loss="bce", beta=1.0,
           eta=0.0, epochs=50, batch_size=32, learning_rate=1e-3, validation_fraction=0.1, patience=5):
    if X.ndim != 3:
        raise ValidationError("LSTM input must be (M, S_RW, V)")
    hidden_size, epochs, batch_size = int(hidden_size), int(epochs), int(batch_size)
    if hidden_size < 1 or epochs < 1 or batch_size < 1:
        raise ValidationError("hidden_size, epochs and batch_size must be positive")
    loss_cfg = LossConfig(loss, beta, eta)
    weights = class_weights if loss_cfg.kind == "bce" else None
    rng = np.random.default_rng(seed)
    params = init_params(X.shape[2], hidden_size, bool(bidirectional), rng)

    order = rng.permutation(X.shape[0])
    n_val = int(round(validation_fraction * X.shape[0]))
    if n_val < 1 or X.shape[0] - n_val < 2:
        n_val = 0
    val_idx, tr_idx = order[:n_val], order[n_val:]
    opt = Adam(params, learning_rate)
    best = (np.inf, {k: v.copy() for k, v in params.items()}, 0)
    stale = 0
    history = []
    for epoch in range(epochs):
        perm = rng.permutation(tr_idx)
        for s in range(0, perm.size, batch_size):
            idx = perm[s:s + batch_size]
            value, grads = loss_and_gradients(params, X[idx], y[idx], loss_cfg, weights)
            if not np.isfinite(value):
                raise NonFiniteLoss(f"loss became {value} at epoch {epoch}")
            opt.step(params, grads)
        if n_val:
            val_loss, _ = loss_and_grad(loss_cfg, forward(params, X[val_idx]), y[val_idx], weights)
            history.append(float(val_loss))
            if val_loss < best[0]:
                best = (val_loss, {k: v.copy() for k, v in params.items()}, epoch + 1)
                stale = 0
            else:
                stale += 1
                if stale >= int(patience):
                    break
    if n_val:
        params = best[1]
    for k, v in params.items():
        if not np.all(np.isfinite(v)):
            raise NonFiniteLoss(f"parameter {k} is not finite")
    return params, {"epochs_run": len(history) if n_val else epochs, "best_epoch": best[2],
                    "val_loss": history}


def _predict(params, X, **_):
    p = sigmoid(forward(params, X))
    return p, (p >= 0.5).astype(np.int64)


register(Algorithm("lstm", _train, _predict, SEQUENCE, defaults=dict(DEFAULTS)))


def train_lstm(windows, labels, loss=None, hidden_size=64, bidirectional=False, epochs=50, batch_size=32,
               learning_rate=1e-3, seed=0, **extra):
    """Fit the LSTM on a ``(M, S_RW, V)`` tensor used as given."""
    check_binary(labels)
    loss = loss or LossConfig()
    hp = {"hidden_size": hidden_size, "bidirectional": bidirectional, "loss": loss.kind, "beta": loss.beta,
          "eta": loss.eta, "epochs": epochs, "batch_size": batch_size, "learning_rate": learning_rate, **extra}
    return train_raw(ModelSpec("lstm", hp, seed), windows, labels)
