"""Differentiable layer primitives on batched NCHW tensors.

Unbatched (C, H, W) inputs are accepted by the convolution ops and returned
unbatched. A global multiply-accumulate counter tallies forward and backward
work of the convolution and dense ops; it serves as the hardware-independent
training-cost proxy.
"""

from __future__ import annotations

import contextlib

import numpy as np

from ..errors import DegenerateSignalError, ShapeError
from . import kernels
from .tensor import Tensor, as_tensor


class MacCounter:
    def __init__(self):
        self.count = 0

    def add(self, n: int):
        self.count += int(n)


MACS = MacCounter()


@contextlib.contextmanager
def count_macs():
    """Yield a counter holding the MACs spent inside the block."""
    result = MacCounter()
    start = MACS.count
    try:
        yield result
    finally:
        result.count = MACS.count - start


def _batched(x: Tensor) -> tuple[Tensor, bool]:
    if x.ndim == 3:
        return x.reshape((1,) + x.shape), True
    if x.ndim != 4:
        raise ShapeError(f"expected (C,H,W) or (N,C,H,W) input, got shape {x.shape}")
    return x, False


def conv_output_size(size: int, k: int, stride: int, pad: int) -> int:
    return (size + 2 * pad - k) // stride + 1


def conv2d(x, weight, bias=None, stride: int = 1, pad: int = 0) -> Tensor:
    """Zero-padded cross-correlation. ``weight`` has shape (C_out, C_in, k, k)."""
    x, squeeze = _batched(as_tensor(x))
    weight = as_tensor(weight)
    n, c, h, w = x.shape
    c_out, c_in, k, k2 = weight.shape
    if k != k2:
        raise ShapeError("only square kernels are supported")
    if c != c_in:
        raise ShapeError(f"input has {c} channels, kernel expects {c_in}")
    if stride < 1:
        raise ShapeError("stride must be >= 1")
    if k > h + 2 * pad or k > w + 2 * pad:
        raise ShapeError(f"kernel {k} larger than padded input {h + 2 * pad}x{w + 2 * pad}")
    oh, ow = conv_output_size(h, k, stride, pad), conv_output_size(w, k, stride, pad)
    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else np.ascontiguousarray(x.data)
    cols = kernels.im2col(xp, k, stride, oh, ow).reshape(n, c * k * k, oh * ow)
    wmat = weight.data.reshape(c_out, -1)
    out = np.matmul(wmat, cols)
    if bias is not None:
        bias = as_tensor(bias)
        out += bias.data[:, None]
    macs = n * c_out * c * k * k * oh * ow
    MACS.add(macs)
    out = out.reshape(n, c_out, oh, ow)

    def back(g):
        g2 = g.reshape(n, c_out, oh * ow)
        gx = gw = gb = None
        if x.requires_grad:
            dcols = np.matmul(wmat.T, g2).reshape(n, c, k, k, oh, ow)
            gxp = kernels.col2im(dcols, h + 2 * pad, w + 2 * pad, stride)
            gx = gxp[:, :, pad : pad + h, pad : pad + w] if pad else gxp
            MACS.add(macs)
        if weight.requires_grad:
            gw = np.einsum("nop,nkp->ok", g2, cols).reshape(weight.shape)
            MACS.add(macs)
        if bias is not None and bias.requires_grad:
            gb = g2.sum(axis=(0, 2))
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    y = Tensor._from_op(out, parents, back)
    return y.reshape(y.shape[1:]) if squeeze else y


def conv_transpose2d(x, weight, bias=None, stride: int = 1, pad: int = 0, output_pad: int = 0) -> Tensor:
    """Transposed convolution (the input-gradient of conv2d).

    ``weight`` has shape (C_in, C_out, k, k); the output side length is
    ``(H - 1) * stride - 2 * pad + k + output_pad``.
    """
    x, squeeze = _batched(as_tensor(x))
    weight = as_tensor(weight)
    n, c, h, w = x.shape
    c_in, c_out, k, _ = weight.shape
    if c != c_in:
        raise ShapeError(f"input has {c} channels, kernel expects {c_in}")
    if not 0 <= output_pad < stride:
        raise ShapeError("output_pad must be in [0, stride)")
    oh = (h - 1) * stride - 2 * pad + k + output_pad
    ow = (w - 1) * stride - 2 * pad + k + output_pad
    if oh < 1 or ow < 1:
        raise ShapeError("transposed convolution output would be empty")
    hp, wp = oh + 2 * pad, ow + 2 * pad
    wmat = weight.data.reshape(c_in, c_out * k * k)
    xm = x.data.reshape(n, c_in, h * w)
    cols = np.matmul(wmat.T, xm).reshape(n, c_out, k, k, h, w)
    full = kernels.col2im(np.ascontiguousarray(cols), hp, wp, stride)
    out = full[:, :, pad : pad + oh, pad : pad + ow]
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data[:, None, None]
    else:
        out = np.ascontiguousarray(out)
    macs = n * c_in * c_out * k * k * h * w
    MACS.add(macs)

    def back(g):
        gp = np.pad(g, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else np.ascontiguousarray(g)
        gcols = kernels.im2col(gp, k, stride, h, w).reshape(n, c_out * k * k, h * w)
        gx = gw = gb = None
        if x.requires_grad:
            gx = np.matmul(wmat, gcols).reshape(n, c, h, w)
            MACS.add(macs)
        if weight.requires_grad:
            gw = np.einsum("nip,nkp->ik", xm, gcols).reshape(weight.shape)
            MACS.add(macs)
        if bias is not None and bias.requires_grad:
            gb = g.sum(axis=(0, 2, 3))
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    y = Tensor._from_op(out, parents, back)
    return y.reshape(y.shape[1:]) if squeeze else y


def linear(x, weight, bias=None) -> Tensor:
    """Dense layer: ``x @ weight.T + bias`` for x of shape (N, in)."""
    x = as_tensor(x)
    weight = as_tensor(weight)
    if x.shape[-1] != weight.shape[1]:
        raise ShapeError(f"dense layer expects {weight.shape[1]} inputs, got {x.shape[-1]}")
    out = x.data @ weight.data.T
    if bias is not None:
        bias = as_tensor(bias)
        out = out + bias.data
    macs = x.data.size // x.shape[-1] * weight.size
    MACS.add(macs)

    def back(g):
        gx = gw = gb = None
        if x.requires_grad:
            gx = g @ weight.data
            MACS.add(macs)
        if weight.requires_grad:
            gw = g.reshape(-1, g.shape[-1]).T @ x.data.reshape(-1, x.shape[-1])
            MACS.add(macs)
        if bias is not None and bias.requires_grad:
            gb = g.reshape(-1, g.shape[-1]).sum(axis=0)
        return gx, gw, gb

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor._from_op(out, parents, back)


def leaky_relu(x, alpha: float = 0.2) -> Tensor:
    x = as_tensor(x)
    slope = np.where(x.data > 0, 1.0, alpha)
    return Tensor._from_op(x.data * slope, (x,), lambda g: (g * slope,))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # split by sign so exp never overflows
    d = x.data
    e = np.exp(-np.abs(d))
    out = np.where(d >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return Tensor._from_op(out, (x,), lambda g: (g * out * (1.0 - out),))


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(x.data)
    return Tensor._from_op(out, (x,), lambda g: (g * (1.0 - out * out),))


def flatten(x) -> Tensor:
    """Collapse everything but the batch axis."""
    x = as_tensor(x)
    return x.reshape(x.shape[0], -1)


def mse(a, b) -> Tensor:
    d = as_tensor(a) - as_tensor(b)
    return d.square().mean()


def power_normalize(x, eps: float = 0.0) -> Tensor:
    """Scale each sample to unit mean-square power.

    Works on a single (c,h,w) tensor or a batch (N,c,h,w), normalizing each
    sample independently.
    """
    x = as_tensor(x)
    axes = tuple(range(x.ndim)) if x.ndim == 3 else tuple(range(1, x.ndim))
    power = x.square().mean(axis=axes, keepdims=True)
    if np.any(power.data <= eps):
        raise DegenerateSignalError("cannot power-normalize an all-zero signal")
    return x / power.sqrt()
