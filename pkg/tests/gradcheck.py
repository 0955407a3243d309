"""Central finite-difference gradient checks for the logistic and LSTM models."""
import numpy as np

from failbench.models import lstm, logreg
from failbench.models.losses import LossConfig

H = 1e-5


def rel_error(a, b):
    a, b = np.ravel(a), np.ravel(b)
    denom = max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / denom)


def numeric_grad(f, x):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + H
        fp = f()
        x[i] = old - H
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * H)
    return g


def logreg_error(loss, rng, n=6, d=3):
    X = rng.normal(size=(n, d))
    y = np.array([0, 1] * (n // 2))
    w = rng.normal(size=d)
    b = np.array([rng.normal()])
    cfg = LossConfig(loss)
    _, gw, gb = logreg.loss_grad(w, b[0], X, y, cfg)
    nw = numeric_grad(lambda: logreg.loss_grad(w, b[0], X, y, cfg)[0], w)
    nb = numeric_grad(lambda: logreg.loss_grad(w, b[0], X, y, cfg)[0], b)
    return rel_error(np.append(gw, gb), np.append(nw, nb))


def lstm_error(loss, rng, bidirectional=False, batch=3, steps=4, n_in=2, hidden=4):
    params = lstm.init_params(n_in, hidden, bidirectional, rng)
    for k in params:
        params[k] = rng.normal(scale=0.5, size=params[k].shape)
    X = rng.normal(size=(batch, steps, n_in))
    y = np.array([1, 0, 1][:batch])
    cfg = LossConfig(loss)
    _, grads = lstm.loss_and_gradients(params, X, y, cfg)
    worst = 0.0
    for k, p in params.items():
        num = numeric_grad(lambda: lstm.loss_and_gradients(params, X, y, cfg)[0], p)
        worst = max(worst, rel_error(grads[k], num))
    return worst
