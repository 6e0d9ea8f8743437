"""Minimal reverse-mode differentiation on numpy arrays.

A Tape records one backward closure per primitive op, in forward order;
backward() replays them in reverse. With no tape active every op is
forward-only, which is the fast path used for rolling forecasts.

Recurrent cells get fused primitives (one tape entry per timestep) in
models.py; everything else composes from the generic ops below.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

_TAPE: list | None = None


class Tensor:
    """An array with a gradient slot. Everything is float64."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


class Tape:
    """Context manager that records ops for one backward pass."""

    def __init__(self):
        self._ops: list = []

    def __enter__(self):
        global _TAPE
        if _TAPE is not None:
            raise RuntimeError("tapes do not nest")
        _TAPE = self._ops
        return self

    def __exit__(self, exc_type, exc, tb):
        global _TAPE
        _TAPE = None
        return False

    def backward(self, loss: Tensor):
        """Seed d(loss)/d(loss) = 1 and accumulate grads into all inputs."""
        loss.grad = np.ones_like(loss.data)
        for bw in reversed(self._ops):
            bw()
        self._ops.clear()


@contextmanager
def no_grad():
    """Run forward passes without recording (inference)."""
    global _TAPE
    saved, _TAPE = _TAPE, None
    try:
        yield
    finally:
        _TAPE = saved


def _rec(bw) -> None:
    if _TAPE is not None:
        _TAPE.append(bw)


def accumulate(t: Tensor, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = g
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _as_data(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def add(a: Tensor, b) -> Tensor:
    b_t = b if isinstance(b, Tensor) else None
    out = Tensor(a.data + _as_data(b))
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(a, _unbroadcast(g, a.data.shape))
        if b_t is not None:
            accumulate(b_t, _unbroadcast(g, b_t.data.shape))
    _rec(bw)
    return out


def sub(a: Tensor, b) -> Tensor:
    b_t = b if isinstance(b, Tensor) else None
    out = Tensor(a.data - _as_data(b))
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(a, _unbroadcast(g, a.data.shape))
        if b_t is not None:
            accumulate(b_t, _unbroadcast(-g, b_t.data.shape))
    _rec(bw)
    return out


def mul(a: Tensor, b) -> Tensor:
    b_t = b if isinstance(b, Tensor) else None
    b_d = _as_data(b)
    out = Tensor(a.data * b_d)
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(a, _unbroadcast(g * b_d, a.data.shape))
        if b_t is not None:
            accumulate(b_t, _unbroadcast(g * a.data, b_t.data.shape))
    _rec(bw)
    return out


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data * c)
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad * c)
    _rec(bw)
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data @ b.data)
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(a, g @ b.data.T)
        accumulate(b, a.data.T @ g)
    _rec(bw)
    return out


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x @ w + b as one fused op (x: (B, n), w: (n, m), b: (m,))."""
    out = Tensor(x.data @ w.data + b.data)
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(x, g @ w.data.T)
        accumulate(w, x.data.T @ g)
        accumulate(b, g.sum(axis=0))
    _rec(bw)
    return out


def relu(a: Tensor) -> Tensor:
    out = Tensor(np.maximum(a.data, 0.0))
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad * (a.data > 0.0))
    _rec(bw)
    return out


def tanh(a: Tensor) -> Tensor:
    out = Tensor(np.tanh(a.data))
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad * (1.0 - out.data * out.data))
    _rec(bw)
    return out


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(1.0 / (1.0 + np.exp(-a.data)))
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad * out.data * (1.0 - out.data))
    _rec(bw)
    return out


def softplus(a: Tensor) -> Tensor:
    out = Tensor(np.logaddexp(0.0, a.data))
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad / (1.0 + np.exp(-a.data)))
    _rec(bw)
    return out


def log(a: Tensor) -> Tensor:
    out = Tensor(np.log(a.data))
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad / a.data)
    _rec(bw)
    return out


def square(a: Tensor) -> Tensor:
    out = Tensor(a.data * a.data)
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad * 2.0 * a.data)
    _rec(bw)
    return out


def mean(a: Tensor) -> Tensor:
    out = Tensor(a.data.mean())
    def bw():
        if out.grad is None:
            return
        accumulate(a, np.full(a.data.shape, out.grad / a.data.size))
    _rec(bw)
    return out


def total(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum())
    def bw():
        if out.grad is None:
            return
        accumulate(a, np.full(a.data.shape, out.grad))
    _rec(bw)
    return out


def div(a: Tensor, b: Tensor) -> Tensor:
    out = Tensor(a.data / b.data)
    def bw():
        g = out.grad
        if g is None:
            return
        accumulate(a, _unbroadcast(g / b.data, a.data.shape))
        accumulate(b, _unbroadcast(-g * out.data / b.data, b.data.shape))
    _rec(bw)
    return out


def shift(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data + c)
    def bw():
        if out.grad is None:
            return
        accumulate(a, out.grad)
    _rec(bw)
    return out


def mse(pred: Tensor, target) -> Tensor:
    """Mean squared error against a constant target."""
    return mean(square(sub(pred, _as_data(target))))


_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def gaussian_nll(mu: Tensor, sigma: Tensor, target) -> Tensor:
    """Mean Gaussian negative log-likelihood of a constant target.

    Per point: 0.5*ln(2*pi) + ln(sigma) + (t - mu)^2 / (2*sigma^2).
    """
    t = _as_data(target)
    quad = div(square(sub(mu, t)), scale(square(sigma), 2.0))
    return shift(mean(add(log(sigma), quad)), _HALF_LOG_2PI)
