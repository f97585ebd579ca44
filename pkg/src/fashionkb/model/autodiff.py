"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Tape-style: each op returns a new Tensor holding a closure that routes the
upstream gradient to its parents. backward() runs an iterative topological
sort, so deep recurrent graphs stay clear of the interpreter recursion limit.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Sequence

import numpy as np

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph construction (e.g. for evaluation passes)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum-reduce a gradient back to the shape it was broadcast from."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward: Callable[[], None] | None = None
        self._parents: tuple[Tensor, ...] = ()

    # -- graph bookkeeping --------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            # copy: the incoming buffer may be shared (e.g. an upstream grad
            # routed to several parents) and we mutate grads in place
            self.grad = grad.copy()
        else:
            self.grad += grad

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward()

    # -- operator sugar ------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(shape: tuple[int, ...], rng: np.random.Generator, scale: float | None = None) -> Tensor:
    """Trainable tensor with scaled-normal init (1/sqrt(fan_in) by default)."""
    if scale is None:
        fan_in = shape[0] if len(shape) > 1 else max(shape[0], 1)
        scale = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.normal(0.0, scale, shape), requires_grad=True)


def zeros_parameter(shape: tuple[int, ...]) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


def _make(data: np.ndarray, parents: Sequence[Tensor], backward_factory) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_factory(out)
    return out


# -- primitive ops ----------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    data = a.data + b.data

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(_unbroadcast(out.grad, a.data.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(out.grad, b.data.shape))

        return backward

    return _make(data, (a, b), factory)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    data = a.data * b.data

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(_unbroadcast(out.grad * b.data, a.data.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(out.grad * a.data, b.data.shape))

        return backward

    return _make(data, (a, b), factory)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    data = a.data @ b.data

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(out.grad @ b.data.T)
            if b.requires_grad:
                b._accumulate(a.data.T @ out.grad)

        return backward

    return _make(data, (a, b), factory)


def tanh(a: Tensor) -> Tensor:
    data = np.tanh(a.data)

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate((1.0 - out.data**2) * out.grad)

        return backward

    return _make(data, (a,), factory)


def sigmoid(a: Tensor) -> Tensor:
    # clip keeps exp in range; sigmoid saturates far inside +-60 anyway
    data = 1.0 / (1.0 + np.exp(-np.clip(a.data, -60.0, 60.0)))

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(out.data * (1.0 - out.data) * out.grad)

        return backward

    return _make(data, (a,), factory)


def exp(a: Tensor) -> Tensor:
    data = np.exp(a.data)

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(out.data * out.grad)

        return backward

    return _make(data, (a,), factory)


def log(a: Tensor) -> Tensor:
    data = np.log(a.data)

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(out.grad / a.data)

        return backward

    return _make(data, (a,), factory)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    data = e / e.sum(axis=axis, keepdims=True)

    def factory(out):
        def backward():
            if a.requires_grad:
                g = out.grad
                dot = (g * out.data).sum(axis=axis, keepdims=True)
                a._accumulate(out.data * (g - dot))

        return backward

    return _make(data, (a,), factory)


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    data = shifted - lse

    def factory(out):
        def backward():
            if a.requires_grad:
                g = out.grad
                soft = np.exp(out.data)
                a._accumulate(g - soft * g.sum(axis=axis, keepdims=True))

        return backward

    return _make(data, (a,), factory)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def factory(out):
        def backward():
            offset = 0
            for t, size in zip(tensors, sizes):
                if t.requires_grad:
                    sl = [slice(None)] * out.grad.ndim
                    sl[axis] = slice(offset, offset + size)
                    t._accumulate(out.grad[tuple(sl)])
                offset += size

        return backward

    return _make(data, tensors, factory)


def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def factory(out):
        def backward():
            if a.requires_grad:
                g = out.grad
                if axis is not None and not keepdims:
                    g = np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(g, a.data.shape).copy())

        return backward

    return _make(data, (a,), factory)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    data = a.data.reshape(shape)

    def factory(out):
        def backward():
            if a.requires_grad:
                a._accumulate(out.grad.reshape(a.data.shape))

        return backward

    return _make(data, (a,), factory)


def cols(a: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous column slice of a 2-D tensor."""
    data = a.data[:, start:stop]

    def factory(out):
        def backward():
            if a.requires_grad:
                g = np.zeros_like(a.data)
                g[:, start:stop] = out.grad
                a._accumulate(g)

        return backward

    return _make(data, (a,), factory)


def take_rows(a: Tensor, idx: np.ndarray) -> Tensor:
    """Gather rows along axis 0; scatter-adds on the way back."""
    idx = np.asarray(idx, dtype=np.intp)
    data = a.data[idx]

    def factory(out):
        def backward():
            if a.requires_grad:
                g = np.zeros_like(a.data)
                np.add.at(g, idx, out.grad)
                a._accumulate(g)

        return backward

    return _make(data, (a,), factory)


def pick(a: Tensor, cols: np.ndarray) -> Tensor:
    """out[i] = a[i, cols[i]] for a 2-D tensor."""
    cols = np.asarray(cols, dtype=np.intp)
    rows = np.arange(a.data.shape[0])
    data = a.data[rows, cols]

    def factory(out):
        def backward():
            if a.requires_grad:
                g = np.zeros_like(a.data)
                np.add.at(g, (rows, cols), out.grad)
                a._accumulate(g)

        return backward

    return _make(data, (a,), factory)


# -- gradient checking -------------------------------------------------------


def finite_difference_gradients(
    loss_fn: Callable[[], Tensor], params: dict[str, Tensor], step: float = 1e-4
) -> dict[str, np.ndarray]:
    """Central-difference gradients of a deterministic scalar loss.

    Uses only forward evaluations, so it is independent of the reverse-mode
    machinery it is used to check.
    """
    grads: dict[str, np.ndarray] = {}
    with no_grad():  # forward evaluations only; no graph needed
        for name, p in params.items():
            g = np.zeros_like(p.data)
            flat = p.data.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + step
                up = loss_fn().item()
                flat[i] = orig - step
                down = loss_fn().item()
                flat[i] = orig
                gflat[i] = (up - down) / (2.0 * step)
            grads[name] = g
    return grads


def gradcheck(
    loss_fn: Callable[[], Tensor],
    params: dict[str, Tensor],
    step: float = 1e-4,
) -> dict[str, float]:
    """Relative error per parameter tensor between reverse-mode and central
    finite-difference gradients: |g_ad - g_fd| / (|g_ad| + |g_fd|) in L2."""
    for p in params.values():
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in params.items()
    }
    numeric = finite_difference_gradients(loss_fn, params, step=step)
    errors: dict[str, float] = {}
    for name in params:
        a, f = analytic[name], numeric[name]
        denom = np.linalg.norm(a) + np.linalg.norm(f)
        errors[name] = float(np.linalg.norm(a - f) / denom) if denom > 0 else 0.0
    return errors
