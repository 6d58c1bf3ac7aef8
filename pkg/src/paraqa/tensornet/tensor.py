"""Reverse-mode autodiff over float64 numpy arrays.

A :class:`Tensor` wraps an ndarray plus an optional backward closure; the
graph is a plain parent list, and :func:`backward` runs a topological
sweep.  Everything is float64: at this scale speed is irrelevant and
finite-difference gradient checks stay reliable.  Wrap evaluation-only
passes in :func:`no_grad` to skip tape construction entirely.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from ..errors import ShapeError

_grad_enabled = True


@contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """Node in the computation graph; leaves carry trainable parameters."""

    __slots__ = ("data", "grad", "requires_grad", "parents", "_backward")

    def __init__(self, data, requires_grad=False, parents=(), backward=None):
        if type(data) is np.ndarray and data.dtype == np.float64:
            self.data = data
        else:
            self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _make(data, parents, backward):
    """Create an op result; collapses to a constant leaf under no_grad."""
    if _grad_enabled and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=parents, backward=backward)
    return Tensor(data)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _accum(t: Tensor, g: np.ndarray):
    # grads are never mutated in place, so holding a reference is safe
    if t.grad is None:
        t.grad = g
    else:
        t.grad = t.grad + g


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def backward(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return _make(out_data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data - b.data

    def backward(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))

    return _make(out_data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def backward(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(out_data, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data / b.data

    def backward(g):
        _accum(a, _unbroadcast(g / b.data, a.data.shape))
        _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(out_data, (a, b), backward)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accum(a, -g)

    return _make(-a.data, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product for the 1D/2D combinations the encoders need."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeError("matmul requires 1D or 2D operands")
    if a.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(
            f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}"
        )
    out_data = a.data @ b.data

    def backward(g):
        if a.data.ndim == 2 and b.data.ndim == 1:
            _accum(a, np.outer(g, b.data))
            _accum(b, a.data.T @ g)
        elif a.data.ndim == 1 and b.data.ndim == 2:
            _accum(a, g @ b.data.T)
            _accum(b, np.outer(a.data, g))
        elif a.data.ndim == 1 and b.data.ndim == 1:
            _accum(a, g * b.data)
            _accum(b, g * a.data)
        else:
            _accum(a, g @ b.data.T)
            _accum(b, a.data.T @ g)

    return _make(out_data, (a, b), backward)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def backward(g):
        _accum(a, g * (1.0 - out_data * out_data))

    return _make(out_data, (a,), backward)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        _accum(a, g * out_data * (1.0 - out_data))

    return _make(out_data, (a,), backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.exp(a.data)

    def backward(g):
        _accum(a, g * out_data)

    return _make(out_data, (a,), backward)


def log(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.log(a.data)

    def backward(g):
        _accum(a, g / a.data)

    return _make(out_data, (a,), backward)


def tsum(a) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accum(a, np.full(a.data.shape, float(g)))

    return _make(a.data.sum(), (a,), backward)


def tmean(a) -> Tensor:
    a = as_tensor(a)
    n = a.data.size

    def backward(g):
        _accum(a, np.full(a.data.shape, float(g) / n))

    return _make(a.data.mean(), (a,), backward)


def concat(parts) -> Tensor:
    """Concatenate 1D (or scalar) tensors into one vector."""
    parts = [as_tensor(p) for p in parts]
    sizes = [p.data.size for p in parts]
    out_data = np.concatenate([p.data.reshape(-1) for p in parts])

    def backward(g):
        off = 0
        for p, size in zip(parts, sizes):
            _accum(p, g[off:off + size].reshape(p.data.shape))
            off += size

    return _make(out_data, tuple(parts), backward)


def vstack(rows) -> Tensor:
    """Stack 1D tensors into a 2D matrix, one per row."""
    rows = [as_tensor(r) for r in rows]
    out_data = np.stack([r.data for r in rows])

    def backward(g):
        for i, r in enumerate(rows):
            _accum(r, g[i])

    return _make(out_data, tuple(rows), backward)


def take_row(a: Tensor, i: int) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        full = np.zeros_like(a.data)
        full[i] = g
        _accum(a, full)

    return _make(a.data[i], (a,), backward)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient passes through only inside the interval."""
    a = as_tensor(a)
    out_data = np.clip(a.data, lo, hi)

    def backward(g):
        _accum(a, g * ((a.data >= lo) & (a.data <= hi)))

    return _make(out_data, (a,), backward)


def softmax(a: Tensor) -> Tensor:
    """Stable softmax of a 1D tensor (max subtracted as a constant shift)."""
    a = as_tensor(a)
    shifted = sub(a, Tensor(np.max(a.data)))
    e = exp(shifted)
    return div(e, tsum(e))


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)

    def backward(g):
        _accum(a, g * c)

    return _make(a.data * c, (a,), backward)


# ---------------------------------------------------------------------------
# backward sweep
# ---------------------------------------------------------------------------


def backward(loss: Tensor):
    """Accumulate gradients of ``loss`` into every reachable ``.grad``."""
    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
