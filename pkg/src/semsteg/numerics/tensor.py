"""Dense float64 tensors with tape-free reverse-mode differentiation.

Every operation on a :class:`Tensor` that involves a gradient-tracking input
records its parents and a closure mapping the output gradient to parent
gradients. :meth:`Tensor.backward` walks that graph in reverse topological
order and then releases it, so a second call on the same graph is an error.
"""

from __future__ import annotations

import contextlib
import threading

import numpy as np

from ..errors import ShapeError, UsageError

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block."""
    prev = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = prev


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    if grad.shape == shape:
        return grad
    ndiff = grad.ndim - len(shape)
    if ndiff > 0:
        grad = grad.sum(axis=tuple(range(ndiff)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def as_tensor(x) -> "Tensor":
    return x if isinstance(x, Tensor) else Tensor(x)


class Tensor:
    """A node in the computation graph holding a float64 array."""

    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False):
        if not (isinstance(data, np.ndarray) and data.dtype == np.float64):
            data = np.array(data, dtype=np.float64)
        self.data = data
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None

    # -- graph plumbing -------------------------------------------------

    @classmethod
    def _from_op(cls, data, parents, backward) -> "Tensor":
        out = cls.__new__(Tensor)
        out.data = data
        out.grad = None
        out.requires_grad = False
        out._parents = ()
        out._backward = None
        if grad_enabled() and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(parents)
            out._backward = backward
        return out

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        """Accumulate d(self)/d(leaf) into ``leaf.grad`` for every tracked leaf."""
        if not self._parents:
            if self.requires_grad and grad is not None:
                g = np.broadcast_to(np.asarray(grad, dtype=np.float64), self.shape)
                self.grad = g.copy() if self.grad is None else self.grad + g
                return
            raise UsageError("backward() called on a tensor with no recorded forward pass")
        if grad is None:
            if self.data.size != 1:
                raise UsageError("backward() without an explicit gradient needs a scalar output")
            grad = np.ones_like(self.data)
        topo = self._toposort()
        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if not node._parents:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            parent_grads = node._backward(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg
        for node in topo:
            if node._parents:
                node._parents = ()
                node._backward = None
                node.requires_grad = False

    def _toposort(self) -> list:
        order, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        return order

    # -- array protocol -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # -- elementwise arithmetic -----------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        a, b = self.shape, other.shape
        return Tensor._from_op(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(g, b)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor._from_op(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other):
        other = as_tensor(other)
        a, b = self.shape, other.shape
        return Tensor._from_op(
            self.data - other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(-g, b)),
        )

    def __rsub__(self, other):
        return as_tensor(other) - self

    def __mul__(self, other):
        other = as_tensor(other)
        x, y = self.data, other.data
        return Tensor._from_op(
            x * y,
            (self, other),
            lambda g: (_unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        x, y = self.data, other.data
        out = x / y
        return Tensor._from_op(
            out,
            (self, other),
            lambda g: (_unbroadcast(g / y, x.shape), _unbroadcast(-g * out / y, y.shape)),
        )

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __pow__(self, p: float):
        x = self.data
        return Tensor._from_op(x**p, (self,), lambda g: (g * p * x ** (p - 1),))

    def square(self):
        x = self.data
        return Tensor._from_op(x * x, (self,), lambda g: (2.0 * g * x,))

    def sqrt(self):
        out = np.sqrt(self.data)
        return Tensor._from_op(out, (self,), lambda g: (g * 0.5 / out,))

    def exp(self):
        out = np.exp(self.data)
        return Tensor._from_op(out, (self,), lambda g: (g * out,))

    def log(self):
        x = self.data
        return Tensor._from_op(np.log(x), (self,), lambda g: (g / x,))

    def clip(self, lo: float, hi: float):
        x = self.data
        mask = (x >= lo) & (x <= hi)
        return Tensor._from_op(np.clip(x, lo, hi), (self,), lambda g: (g * mask,))

    # -- reductions and shape -------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        shape = self.shape

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._from_op(np.asarray(self.data.sum(axis=axis, keepdims=keepdims)), (self,), back)

    def mean(self, axis=None, keepdims: bool = False):
        if axis is None:
            n = self.data.size
        else:
            axes = (axis,) if isinstance(axis, int) else axis
            n = int(np.prod([self.shape[a] for a in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.shape
        return Tensor._from_op(self.data.reshape(shape), (self,), lambda g: (g.reshape(old),))

    def __getitem__(self, idx):
        shape = self.shape

        def back(g):
            full = np.zeros(shape)
            full[idx] = g
            return (full,)

        return Tensor._from_op(np.array(self.data[idx]), (self,), back)


class Parameter(Tensor):
    """A trainable leaf tensor; ``name`` is assigned by the owning module."""

    def __init__(self, data, name: str = ""):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True)
        self.name = name
        self.frozen = False

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


def concat(tensors, axis: int = 1) -> Tensor:
    """Concatenate along ``axis`` (the channel axis for batched NCHW)."""
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def back(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(tensors))
        )

    return Tensor._from_op(np.concatenate([t.data for t in tensors], axis=axis), tensors, back)


def split(x: Tensor, first: int, axis: int = 1) -> tuple[Tensor, Tensor]:
    """Split channels into the first ``first`` and the rest."""
    n = x.shape[axis]
    if not 0 < first < n:
        raise ShapeError(f"cannot split {n} channels at {first}")
    lo = [slice(None)] * x.ndim
    hi = [slice(None)] * x.ndim
    lo[axis] = slice(0, first)
    hi[axis] = slice(first, n)
    return x[tuple(lo)], x[tuple(hi)]


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]

    def back(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._from_op(np.stack([t.data for t in tensors], axis=axis), tensors, back)
