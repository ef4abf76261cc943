"""Pure-numpy versions of the compiled kernels (same signatures).

Used when numba is unavailable or disabled through the environment. Results
agree with the compiled path to rounding, not bit-for-bit.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _sigmoid(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def _unpack(params, d, h):
    bo = h * d
    vo = bo + h
    return (params[:bo].reshape(h, d), params[bo:vo], params[vo:vo + h],
            params[vo + h:vo + h + 1])


def forward_one(params, d, h, out_sigmoid, x):
    return float(predict_batch(params, d, h, out_sigmoid, np.asarray(x)[None, :])[0])


def predict_batch(params, d, h, out_sigmoid, X):
    W, b, v, c = _unpack(params, d, h)
    hidden = _sigmoid(X @ W.T + b)
    u = hidden @ v + c[0]
    return _sigmoid(u) if out_sigmoid else u


def gradient_one(params, d, h, out_sigmoid, x, target, grad):
    W, b, v, c = _unpack(params, d, h)
    gW, gb, gv, gc = _unpack(grad, d, h)
    hidden = _sigmoid(W @ x + b)
    u = hidden @ v + c[0]
    if out_sigmoid:
        y = _sigmoid(u)
        delta_out = (y - target) * y * (1.0 - y)
    else:
        y = u
        delta_out = y - target
    delta_h = delta_out * v * hidden * (1.0 - hidden)
    gc[0] = delta_out
    gv[:] = delta_out * hidden
    gb[:] = delta_h
    gW[:] = np.outer(delta_h, x)
    r = y - target
    return 0.5 * r * r


def sgd_epoch(params, d, h, out_sigmoid, X, y, order, lr):
    grad = np.empty_like(params)
    with np.errstate(over="ignore", invalid="ignore"):
        for k, idx in enumerate(order):
            loss = gradient_one(params, d, h, out_sigmoid, X[idx], y[idx], grad)
            if not np.isfinite(loss):
                return k
            params -= lr * grad
    return -1


def dataset_rmse(params, d, h, out_sigmoid, X, y):
    r = predict_batch(params, d, h, out_sigmoid, X) - y
    return float(np.sqrt(np.mean(r * r)))


def iterate_forecast(params, d, h, out_sigmoid, window, steps):
    buf = np.empty(d + steps)
    buf[:d] = window
    out = np.empty(steps)
    for k in range(steps):
        out[k] = buf[d + k] = forward_one(params, d, h, out_sigmoid, buf[k:k + d])
    return out


def rolling_median(values, window):
    return np.median(sliding_window_view(values, window), axis=1)
