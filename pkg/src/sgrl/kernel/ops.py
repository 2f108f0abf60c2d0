"""Differentiable ops on kernel Tensors.

Every op computes its value eagerly and registers a vector-Jacobian closure
on the active tape. Broadcasting backward is handled by summing the upstream
gradient down to the input's shape.
"""

import numpy as np

from .tensor import Tensor, as_tensor, _emit


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    g = grad
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g.reshape(shape)


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    w = a.watched or b.watched

    def vjp(g):
        return (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape))

    return _emit(a.data + b.data, (a, b), vjp, w)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    w = a.watched or b.watched

    def vjp(g):
        return (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape))

    return _emit(a.data - b.data, (a, b), vjp, w)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    w = a.watched or b.watched
    ad, bd = a.data, b.data

    def vjp(g):
        return (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape))

    return _emit(ad * bd, (a, b), vjp, w)


def neg(a):
    a = as_tensor(a)
    return _emit(-a.data, (a,), lambda g: (-g,), a.watched)


def scale(a, c):
    """Multiply by a python float constant."""
    a = as_tensor(a)
    c = float(c)
    return _emit(a.data * c, (a,), lambda g: (g * c,), a.watched)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    w = a.watched or b.watched
    ad, bd = a.data, b.data
    out = ad @ bd

    def vjp(g):
        if ad.ndim == 1 and bd.ndim == 2:        # (n,) @ (n,m) -> (m,)
            return (g @ bd.T, np.outer(ad, g))
        if ad.ndim == 2 and bd.ndim == 1:        # (k,n) @ (n,) -> (k,)
            return (np.outer(g, bd), ad.T @ g)
        return (g @ bd.T, ad.T @ g)              # 2D @ 2D

    return _emit(out, (a, b), vjp, w)


def sigmoid(a):
    a = as_tensor(a)
    # stable two-branch form
    x = a.data
    out = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.clip(x, 0, None))),
                   np.exp(np.clip(x, None, 0)) / (1.0 + np.exp(np.clip(x, None, 0))))

    def vjp(g):
        return (g * out * (1.0 - out),)

    return _emit(out, (a,), vjp, a.watched)


def tanh(a):
    a = as_tensor(a)
    out = np.tanh(a.data)

    def vjp(g):
        return (g * (1.0 - out * out),)

    return _emit(out, (a,), vjp, a.watched)


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0

    def vjp(g):
        return (g * mask,)

    return _emit(a.data * mask, (a,), vjp, a.watched)


def softplus(a):
    """log(1 + exp(x)), computed stably; derivative is sigmoid(x)."""
    a = as_tensor(a)
    x = a.data
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.clip(x, 0, None))),
                   np.exp(np.clip(x, None, 0)) / (1.0 + np.exp(np.clip(x, None, 0))))

    def vjp(g):
        return (g * sig,)

    return _emit(out, (a,), vjp, a.watched)


def softmax(a):
    """Softmax along the last axis, with max subtraction for stability."""
    a = as_tensor(a)
    x = a.data
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        return (out * (g - dot),)

    return _emit(out, (a,), vjp, a.watched)


def tsum(a, axis=None):
    a = as_tensor(a)
    shape = a.data.shape

    def vjp(g):
        if axis is None:
            return (np.full(shape, float(g)),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _emit(a.data.sum(axis=axis), (a,), vjp, a.watched)


def tmean(a):
    a = as_tensor(a)
    n = a.data.size

    def vjp(g):
        return (np.full(a.data.shape, float(g) / n),)

    return _emit(a.data.mean(), (a,), vjp, a.watched)


def square(a):
    a = as_tensor(a)
    ad = a.data

    def vjp(g):
        return (g * 2.0 * ad,)

    return _emit(ad * ad, (a,), vjp, a.watched)


def concat_rows(parts):
    parts = [as_tensor(p) for p in parts]
    w = any(p.watched for p in parts)
    sizes = [p.data.shape[0] for p in parts]

    def vjp(g):
        out, off = [], 0
        for n in sizes:
            out.append(g[off:off + n])
            off += n
        return tuple(out)

    return _emit(np.concatenate([p.data for p in parts], axis=0), tuple(parts), vjp, w)


def slice_rows(a, start, stop):
    a = as_tensor(a)
    shape = a.data.shape

    def vjp(g):
        full = np.zeros(shape)
        full[start:stop] = g
        return (full,)

    return _emit(a.data[start:stop], (a,), vjp, a.watched)


def slice_cols(a, start, stop):
    a = as_tensor(a)
    shape = a.data.shape

    def vjp(g):
        full = np.zeros(shape)
        full[..., start:stop] = g
        return (full,)

    return _emit(a.data[..., start:stop], (a,), vjp, a.watched)


def pad_rows(a, total, offset=0):
    """Embed a (n, ...) tensor into a zero (total, ...) tensor at row `offset`."""
    a = as_tensor(a)
    n = a.data.shape[0]
    out = np.zeros((total,) + a.data.shape[1:])
    out[offset:offset + n] = a.data

    def vjp(g):
        return (g[offset:offset + n],)

    return _emit(out, (a,), vjp, a.watched)


def stack_rows(parts):
    """Stack equal-shape 1D tensors into a matrix."""
    parts = [as_tensor(p) for p in parts]
    w = any(p.watched for p in parts)

    def vjp(g):
        return tuple(g[k] for k in range(len(parts)))

    return _emit(np.stack([p.data for p in parts], axis=0), tuple(parts), vjp, w)


def cumsum_rows(a):
    a = as_tensor(a)

    def vjp(g):
        return (np.flip(np.cumsum(np.flip(g, axis=0), axis=0), axis=0),)

    return _emit(np.cumsum(a.data, axis=0), (a,), vjp, a.watched)


def take_per_row(a, idx):
    """a[(B, A)], idx[(B,)] int -> (B,) picking one column per row."""
    a = as_tensor(a)
    idx = np.asarray(idx, dtype=np.int64)
    rows = np.arange(a.data.shape[0])

    def vjp(g):
        full = np.zeros(a.data.shape)
        full[rows, idx] = g
        return (full,)

    return _emit(a.data[rows, idx], (a,), vjp, a.watched)
