"""Numba-compiled inner loops.

Parameter vectors use the flat layout documented in ``kernels/__init__.py``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


@njit(cache=True, nogil=True)
def forward_one(params, d, h, out_sigmoid, x):
    vo = h * d + h
    u = params[vo + h]
    for j in range(h):
        z = params[h * d + j]
        for i in range(d):
            z += params[j * d + i] * x[i]
        u += params[vo + j] * _sigmoid(z)
    if out_sigmoid:
        return _sigmoid(u)
    return u


@njit(cache=True, nogil=True)
def predict_batch(params, d, h, out_sigmoid, X):
    n = X.shape[0]
    out = np.empty(n)
    for k in range(n):
        out[k] = forward_one(params, d, h, out_sigmoid, X[k])
    return out


@njit(cache=True, nogil=True)
def gradient_one(params, d, h, out_sigmoid, x, target, grad):
    """Write d(0.5*(y-target)**2)/dparams into ``grad``; return the loss."""
    bo = h * d
    vo = bo + h
    hidden = np.empty(h)
    u = params[vo + h]
    for j in range(h):
        z = params[bo + j]
        for i in range(d):
            z += params[j * d + i] * x[i]
        hj = _sigmoid(z)
        hidden[j] = hj
        u += params[vo + j] * hj
    if out_sigmoid:
        y = _sigmoid(u)
        delta_out = (y - target) * y * (1.0 - y)
    else:
        y = u
        delta_out = y - target
    grad[vo + h] = delta_out
    for j in range(h):
        hj = hidden[j]
        grad[vo + j] = delta_out * hj
        delta_h = delta_out * params[vo + j] * hj * (1.0 - hj)
        grad[bo + j] = delta_h
        for i in range(d):
            grad[j * d + i] = delta_h * x[i]
    r = y - target
    return 0.5 * r * r


@njit(cache=True, nogil=True)
def sgd_epoch(params, d, h, out_sigmoid, X, y, order, lr):
    """One pass of online SGD over ``order``; updates ``params`` in place.

    Returns the position in ``order`` of the first example whose loss is
    non-finite, or -1.
    """
    grad = np.empty(params.shape[0])
    for k in range(order.shape[0]):
        idx = order[k]
        loss = gradient_one(params, d, h, out_sigmoid, X[idx], y[idx], grad)
        if not math.isfinite(loss):
            return k
        for p in range(params.shape[0]):
            params[p] -= lr * grad[p]
    return -1


@njit(cache=True, nogil=True)
def dataset_rmse(params, d, h, out_sigmoid, X, y):
    n = X.shape[0]
    acc = 0.0
    for k in range(n):
        r = forward_one(params, d, h, out_sigmoid, X[k]) - y[k]
        acc += r * r
    return math.sqrt(acc / n)


@njit(cache=True, nogil=True)
def iterate_forecast(params, d, h, out_sigmoid, window, steps):
    buf = np.empty(d + steps)
    buf[:d] = window
    out = np.empty(steps)
    for k in range(steps):
        yk = forward_one(params, d, h, out_sigmoid, buf[k:k + d])
        out[k] = yk
        buf[d + k] = yk
    return out


@njit(cache=True, nogil=True)
def rolling_median(values, window):
    """Sliding median with a sorted buffer updated by one delete + one insert."""
    n = values.shape[0] - window + 1
    out = np.empty(n)
    buf = np.sort(values[:window])
    mid = window // 2
    odd = window % 2 == 1
    for t in range(n):
        out[t] = buf[mid] if odd else (buf[mid - 1] + buf[mid]) / 2.0
        if t + 1 == n:
            break
        old = values[t]
        new = values[t + window]
        pos = np.searchsorted(buf, old)
        # shift the gap towards where ``new`` belongs
        while pos > 0 and buf[pos - 1] > new:
            buf[pos] = buf[pos - 1]
            pos -= 1
        while pos < window - 1 and buf[pos + 1] < new:
            buf[pos] = buf[pos + 1]
            pos += 1
        buf[pos] = new
    return out
