"""Differentiable float64 tensors, layers, Adam and a seeded RNG."""

from . import kernels
from .layers import (
    Concat,
    Conv2d,
    ConvTranspose2d,
    Dense,
    Flatten,
    LeakyReLU,
    Module,
    Sequential,
    Sigmoid,
    Split,
    Tanh,
)
from .ops import (
    MACS,
    conv2d,
    conv_transpose2d,
    count_macs,
    flatten,
    leaky_relu,
    linear,
    mse,
    power_normalize,
    sigmoid,
    tanh,
)
from .optim import Adam, OptimState, adam_step
from .rng import Rng, derive_seed, gauss_sample
from .tensor import Parameter, Tensor, as_tensor, concat, no_grad, split, stack

__all__ = [
    "Adam", "Concat", "Conv2d", "ConvTranspose2d", "Dense", "Flatten", "LeakyReLU",
    "MACS", "Module", "OptimState", "Parameter", "Rng", "Sequential", "Sigmoid", "Split",
    "Tanh", "Tensor", "adam_step", "as_tensor", "concat", "conv2d", "conv_transpose2d",
    "count_macs", "derive_seed", "flatten", "gauss_sample", "kernels", "leaky_relu",
    "linear", "mse", "no_grad", "power_normalize", "sigmoid", "split", "stack", "tanh",
]
