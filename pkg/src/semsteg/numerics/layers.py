"""Module containers and the fixed layer menu."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ShapeError
from . import ops
from .rng import Rng
from .tensor import Parameter, Tensor, concat, split


class Module:
    """Base class: parameters are discovered from attributes in definition order."""

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def named_parameters(self, prefix: str = ""):
        for key, value in vars(self).items():
            if key.startswith("_"):
                continue
            name = f"{prefix}{key}"
            if isinstance(value, Parameter):
                value.name = name
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(name + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")
                    elif isinstance(item, Parameter):
                        item.name = f"{name}.{i}"
                        yield item.name, item

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def set_trainable(self, trainable: bool):
        for p in self.parameters():
            p.requires_grad = trainable
            p.frozen = not trainable

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        params = dict(self.named_parameters())
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise ShapeError(f"state mismatch: missing={sorted(missing)} unexpected={sorted(extra)}")
        for name, p in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise ShapeError(f"{name}: expected shape {p.shape}, got {value.shape}")
            p.data = value.copy()


def glorot(rng: Rng, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


class Conv2d(Module):
    def __init__(self, c_in, c_out, k=3, stride=1, pad=None, *, rng: Rng, zero_init=False):
        self.stride = stride
        self.pad = k // 2 if pad is None else pad
        shape = (c_out, c_in, k, k)
        if zero_init:
            self.weight = Parameter(np.zeros(shape))
        else:
            self.weight = Parameter(glorot(rng, shape, c_in * k * k, c_out * k * k))
        self.bias = Parameter(np.zeros(c_out))

    def forward(self, x):
        return ops.conv2d(x, self.weight, self.bias, self.stride, self.pad)


class ConvTranspose2d(Module):
    def __init__(self, c_in, c_out, k=3, stride=1, pad=None, output_pad=None, *, rng: Rng, zero_init=False):
        self.stride = stride
        self.pad = k // 2 if pad is None else pad
        self.output_pad = (stride - 1) if output_pad is None else output_pad
        shape = (c_in, c_out, k, k)
        if zero_init:
            self.weight = Parameter(np.zeros(shape))
        else:
            self.weight = Parameter(glorot(rng, shape, c_in * k * k, c_out * k * k))
        self.bias = Parameter(np.zeros(c_out))

    def forward(self, x):
        return ops.conv_transpose2d(x, self.weight, self.bias, self.stride, self.pad, self.output_pad)


class Dense(Module):
    def __init__(self, n_in, n_out, *, rng: Rng, zero_init=False):
        shape = (n_out, n_in)
        self.weight = Parameter(np.zeros(shape) if zero_init else glorot(rng, shape, n_in, n_out))
        self.bias = Parameter(np.zeros(n_out))

    def forward(self, x):
        return ops.linear(x, self.weight, self.bias)


class LeakyReLU(Module):
    def __init__(self, alpha: float = 0.2):
        self.alpha = alpha

    def forward(self, x):
        return ops.leaky_relu(x, self.alpha)


class Sigmoid(Module):
    def forward(self, x):
        return ops.sigmoid(x)


class Tanh(Module):
    def forward(self, x):
        return ops.tanh(x)


class Flatten(Module):
    def forward(self, x):
        return ops.flatten(x)


class Concat(Module):
    """Channel concatenation of a sequence of inputs."""

    def forward(self, xs):
        return concat(xs, axis=1)


class Split(Module):
    """Channel split into the first ``c`` channels and the rest."""

    def __init__(self, c: int):
        self.c = c

    def forward(self, x):
        return split(x, self.c, axis=1)


class Sequential(Module):
    def __init__(self, *layers: Module):
        self.layers = list(layers)

    def forward(self, x) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def __getitem__(self, i):
        return self.layers[i]

    def __len__(self):
        return len(self.layers)
