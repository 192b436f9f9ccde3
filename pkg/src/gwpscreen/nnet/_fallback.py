"""NumPy implementation of the training kernel.

Parameters live in one flat vector.  Layer ``l`` with ``layout[l] = (fan_in,
fan_out)`` stores its weight matrix (``fan_out x fan_in``, row-major)
followed by its bias vector.  Activation codes: 0 = tanh, 1 = sigmoid.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def unpack(theta: np.ndarray, layout: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Views ``(W, b)`` into ``theta`` for every layer."""
    out = []
    off = 0
    for fan_in, fan_out in layout:
        fan_in, fan_out = int(fan_in), int(fan_out)
        w = theta[off:off + fan_in * fan_out].reshape(fan_out, fan_in)
        off += fan_in * fan_out
        b = theta[off:off + fan_out]
        off += fan_out
        out.append((w, b))
    return out


def forward(theta: np.ndarray, layout: np.ndarray, x: np.ndarray, act: int) -> np.ndarray:
    """Network output for each row of ``x``, shape ``(n,)``."""
    layers = unpack(theta, layout)
    a = x
    for w, b in layers[:-1]:
        z = a @ w.T + b
        a = np.tanh(z) if act == 0 else _sigmoid(z)
    w, b = layers[-1]
    return (a @ w.T + b)[:, 0]


def gradient(
    theta: np.ndarray, layout: np.ndarray, x: np.ndarray, y: np.ndarray, act: int, grad: np.ndarray
) -> float:
    """Mean-squared error on ``(x, y)``; writes d(loss)/d(theta) into ``grad``."""
    layers = unpack(theta, layout)
    grads = unpack(grad, layout)
    acts = [x]
    a = x
    for w, b in layers[:-1]:
        z = a @ w.T + b
        a = np.tanh(z) if act == 0 else _sigmoid(z)
        acts.append(a)
    w, b = layers[-1]
    yhat = (a @ w.T + b)[:, 0]
    diff = yhat - y
    n = x.shape[0]
    loss = float(diff @ diff) / n
    d = (2.0 / n) * diff[:, None]
    for l in range(len(layers) - 1, -1, -1):
        gw, gb = grads[l]
        gw[...] = d.T @ acts[l]
        gb[...] = d.sum(axis=0)
        if l:
            a = acts[l]
            deriv = 1.0 - a * a if act == 0 else a * (1.0 - a)
            d = (d @ layers[l][0]) * deriv
    return loss


def run_epoch(
    theta: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    layout: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    order: np.ndarray,
    batch_size: int,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
    act: int,
) -> tuple[float, int]:
    """One pass of mini-batch Adam over ``x[order]``; updates in place.

    Returns the size-weighted mean batch loss and the new step count.
    Overflow is left to show up as a non-finite loss, as in the compiled kernel.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _epoch(theta, m, v, t, layout, x, y, order, batch_size, lr, beta1, beta2, eps, act)


def _epoch(theta, m, v, t, layout, x, y, order, batch_size, lr, beta1, beta2, eps, act):
    n = order.shape[0]
    grad = np.empty_like(theta)
    total = 0.0
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        loss = gradient(theta, layout, x[idx], y[idx], act, grad)
        total += loss * idx.shape[0]
        t += 1
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad * grad
        c1 = 1.0 - beta1**t
        c2 = 1.0 - beta2**t
        theta -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return total / n, t
